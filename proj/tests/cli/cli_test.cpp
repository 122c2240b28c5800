#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli/app.hpp"
#include "cli/output.hpp"
#include "cli/tables.hpp"

using recp::cli::run_cli;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("recp_cli_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

} // namespace

TEST(Cli, MinimalSimulateGivesHeaderAndOneRow) {
    const auto r = run({"simulate", "--method", "naive", "--k", "5", "--trials", "10", "--seed", "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 2u);
    EXPECT_EQ(ls[0].rfind("method,variant,k,n_per_group,alpha,delta,epsilon,N,trials,coverage,incorrect_coverage,"
                          "mean_size,full_coverage_flag,failures,seed",
                          0),
              0u);
    EXPECT_EQ(ls[1].rfind("naive,,5,500,0.1,", 0), 0u);
}

TEST(Cli, InvalidAlphaNamesTheField) {
    const auto r = run({"simulate", "--k", "5", "--alpha", "1.5", "--seed", "1"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("alpha"), std::string::npos);
}

TEST(Cli, SeedIsMandatory) {
    const auto r = run({"simulate", "--k", "5"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("seed"), std::string::npos);
    EXPECT_EQ(run({"reproduce-table", "1"}).code, 2);
}

TEST(Cli, UnknownFlagsAndTables) {
    EXPECT_EQ(run({"simulate", "--bogus", "1"}).code, 2);
    EXPECT_EQ(run({"reproduce-table", "99", "--seed", "1"}).code, 2);
    EXPECT_EQ(run({"reproduce-table", "7", "--seed", "1"}).code, 2);
    EXPECT_EQ(run({"simulate", "--k", "5", "--seed", "1", "--format", "xml"}).code, 2);
    EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, UnknownCriterionIsConfigError) {
    const auto r = run({"check", "no-such-criterion"});
    EXPECT_EQ(r.code, 2);
    EXPECT_TRUE(r.out.empty());
}

TEST(Cli, CheckRunsOneCriterion) {
    const auto r = run({"check", "guaranteed-full", "--trials", "20"});
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(r.out.rfind("PASS", 0), 0u);
}

TEST(Cli, UnwritableOutputIsIoError) {
    const auto r = run({"simulate", "--k", "5", "--seed", "1", "--trials", "2", "--out", "/nonexistent-dir/x.csv"});
    EXPECT_EQ(r.code, 3);
}

TEST(Cli, MissingConfigFileIsIoError) {
    EXPECT_EQ(run({"simulate", "--config", temp_path("missing.cfg").string()}).code, 3);
}

TEST(Cli, ConfigFileWithFlagOverride) {
    const auto cfg = temp_path("run.cfg");
    {
        std::ofstream f(cfg);
        f << "method=subsample\nk=5,20\nN=1,2\ntrials=8\nseed=3\nalpha=0.1\n";
    }
    const auto r = run({"simulate", "--config", cfg.string(), "--trials", "6"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    ASSERT_EQ(ls.size(), 5u);
    EXPECT_EQ(ls[1].rfind("subsample,,5,500,0.1,0.05,0.05,1,6,", 0), 0u);
    EXPECT_EQ(ls[4].rfind("subsample,,20,500,0.1,0.05,0.05,2,6,", 0), 0u);

    std::ofstream(cfg) << "unknown_key=1\n";
    EXPECT_EQ(run({"simulate", "--config", cfg.string(), "--k", "5", "--seed", "1"}).code, 2);
    std::filesystem::remove(cfg);
}

TEST(Cli, ByteIdenticalFiles) {
    const auto a = temp_path("a.json");
    const auto b = temp_path("b.json");
    const std::vector<std::string> base{"simulate", "--k",      "10,25",  "--method", "subsample", "--N", "1,2",
                                        "--trials", "15",       "--seed", "42",       "--format",  "json"};
    auto args_a = base, args_b = base;
    args_a.insert(args_a.end(), {"--out", a.string(), "--threads", "1"});
    args_b.insert(args_b.end(), {"--out", b.string(), "--threads", "2"});
    ASSERT_EQ(run(args_a).code, 0);
    ASSERT_EQ(run(args_b).code, 0);
    const auto sa = slurp(a);
    EXPECT_FALSE(sa.empty());
    EXPECT_EQ(sa, slurp(b));
    EXPECT_NE(sa.find("\"full_coverage_flag\""), std::string::npos);
    EXPECT_NE(sa.find("\"mean_size\": \"inf\""), std::string::npos);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST(Cli, UnboundedSizesPrintInf) {
    const auto r = run({"simulate", "--k", "5", "--method", "subsample", "--N", "2", "--trials", "3", "--seed", "1"});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(lines(r.out)[1].find(",inf,true,"), std::string::npos);
}

TEST(Cli, RandomSetSplitsAlpha) {
    const auto r = run({"simulate", "--k", "5", "--method", "randomset", "--alpha", "0.05", "--trials", "2", "--seed",
                        "1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out)[1].rfind("randomset,mean,5,500,0.05,0.025,0.025,", 0), 0u);
    EXPECT_EQ(run({"simulate", "--k", "5", "--method", "randomset", "--alpha", "0.1", "--delta", "0.02", "--epsilon",
                   "0.02", "--seed", "1"})
                  .code,
              2);
}

TEST(Tables, UnsupNaiveMatchesKGrid) {
    const auto plans = recp::cli::resolve_table("unsup-naive");
    ASSERT_EQ(plans.size(), 3u);
    const std::vector<std::size_t> grid{5, 10, 15, 20, 25, 50, 100, 250, 500, 1000};
    EXPECT_EQ(plans[0].k_grid, grid);
    EXPECT_DOUBLE_EQ(plans[1].methods.front().alpha, 0.05);
    const auto sub = recp::cli::resolve_table("4");
    ASSERT_EQ(sub.front().methods.size(), 6u);
    EXPECT_EQ(sub.front().methods.back().n_subsamples, 10u);
    const auto kde = recp::cli::resolve_table("35");
    EXPECT_EQ(kde.front().design, "sup");
    EXPECT_DOUBLE_EQ(kde.front().mu, 1.0);
    EXPECT_EQ(kde.front().methods.front().variant, recp::RandomSetVariant::kde);
}

TEST(Tables, ReproduceWithReducedGrid) {
    const auto r = run({"reproduce-table", "unsup-naive", "--seed", "5", "--trials", "5", "--k", "5,10"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(lines(r.out).size(), 7u);
}

TEST(Output, DoubleFormatting) {
    EXPECT_EQ(recp::cli::format_double(0.1), "0.1");
    EXPECT_EQ(recp::cli::format_double(1.0), "1");
    EXPECT_EQ(recp::cli::format_double(0.849), "0.849");
}
