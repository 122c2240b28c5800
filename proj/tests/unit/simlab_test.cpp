#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "recp/error.hpp"
#include "recp/simlab.hpp"

using namespace recp;

namespace {

MethodSpec naive(double alpha = 0.1) {
    MethodSpec m;
    m.alpha = alpha;
    return m;
}

void expect_same(const ExperimentSummary& a, const ExperimentSummary& b) {
    EXPECT_EQ(a.coverage, b.coverage);
    EXPECT_EQ(a.mean_size, b.mean_size);
    EXPECT_EQ(a.data_digest, b.data_digest);
    EXPECT_EQ(a.failures, b.failures);
    EXPECT_EQ(a.unbounded, b.unbounded);
    EXPECT_EQ(a.incorrect_coverage, b.incorrect_coverage);
}

} // namespace

TEST(GenUnsup, PooledVarianceIsTauSquaredPlusSigmaSquared) {
    Rng rng(1);
    const auto d = gen_unsup(UnsupDesign::balanced(2000, 50), rng);
    std::vector<double> all;
    for (const auto& g : d.groups) all.insert(all.end(), g.begin(), g.end());
    const double m = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
    double ss = 0.0;
    for (double v : all) ss += (v - m) * (v - m);
    EXPECT_NEAR(ss / static_cast<double>(all.size() - 1), 2.0, 0.15);
    EXPECT_EQ(d.thetas.size(), 2000u);
}

TEST(GenUnsup, FixedSeedRepeats) {
    Rng a(9), b(9);
    const auto x = gen_unsup(UnsupDesign::balanced(5, 7), a);
    const auto y = gen_unsup(UnsupDesign::balanced(5, 7), b);
    EXPECT_EQ(x.groups, y.groups);
    EXPECT_EQ(x.y_new, y.y_new);
}

TEST(GenSup, ShapesAndLabels) {
    Rng rng(2);
    const auto d = gen_sup(SupDesign{30, 12, 1.0, 0.1}, rng);
    ASSERT_EQ(d.groups.size(), 30u);
    for (const auto& g : d.groups) {
        ASSERT_EQ(g.size(), 12u);
        for (const auto& p : g) EXPECT_TRUE(p.y == 0 || p.y == 1);
    }
    EXPECT_TRUE(d.y_star == 0 || d.y_star == 1);
}

TEST(Pathological, Shape) {
    const auto d = pathological_design();
    ASSERT_EQ(d.k(), 20u);
    EXPECT_EQ(d.group_sizes.front(), 1000u);
    EXPECT_EQ(d.group_sizes.back(), 5u);
    EXPECT_DOUBLE_EQ(d.tau, 10.0);
    EXPECT_DOUBLE_EQ(d.sigma, 0.1);
    const auto v = pathological_design(SpreadConvention::variance);
    EXPECT_DOUBLE_EQ(v.tau, std::sqrt(10.0));
}

TEST(DesignValidation, RejectsBadParameters) {
    EXPECT_THROW(UnsupDesign::balanced(0, 5).validate(), PreconditionError);
    EXPECT_THROW(UnsupDesign::balanced(5, 5, 0.0, 1.0, 0.0).validate(), PreconditionError);
    EXPECT_THROW((SupDesign{0, 5, 0.0, 1.0}.validate()), PreconditionError);
}

TEST(RunExperiment, SingleTrialCoverageIsZeroOrOne) {
    const auto s = run_experiment(UnsupDesign::balanced(10, 20), "unsup", naive(), {1, 5, 1});
    EXPECT_TRUE(s.coverage == 0.0 || s.coverage == 1.0);
    EXPECT_EQ(s.n_trials, 1u);
}

TEST(RunExperiment, DeterministicAndThreadInvariant) {
    const auto design = UnsupDesign::balanced(30, 20);
    const auto a = run_experiment(design, "unsup", naive(), {60, 77, 1});
    const auto b = run_experiment(design, "unsup", naive(), {60, 77, 1});
    const auto c = run_experiment(design, "unsup", naive(), {60, 77, 3});
    expect_same(a, b);
    expect_same(a, c);
    const auto d = run_experiment(design, "unsup", naive(), {60, 78, 1});
    EXPECT_NE(a.data_digest, d.data_digest);
}

TEST(RunExperiment, MethodsShareData) {
    MethodSpec sub;
    sub.kind = MethodKind::subsample;
    const auto s = run_experiments(UnsupDesign::balanced(30, 20), "unsup", {naive(), sub}, {40, 3, 1});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].data_digest, s[1].data_digest);
    EXPECT_EQ(s[1].method, "subsample");
}

TEST(RunExperiment, GuaranteedFullCellsCoverExactly) {
    MethodSpec sub;
    sub.kind = MethodKind::subsample;
    sub.n_subsamples = 4;
    const auto s = run_experiment(UnsupDesign::balanced(25, 10), "unsup", sub, {50, 4, 1});
    EXPECT_TRUE(s.full_coverage_flag);
    EXPECT_EQ(s.coverage, 1.0);
    EXPECT_EQ(s.unbounded, 50u);
    EXPECT_TRUE(std::isinf(s.mean_size));
}

TEST(RunExperiment, SupervisedReportsIncorrectCoverage) {
    const auto s = run_experiment(SupDesign{20, 30, 1.0, 0.1}, "sup", naive(), {20, 5, 1});
    ASSERT_TRUE(s.incorrect_coverage.has_value());
    EXPECT_GE(*s.incorrect_coverage, 0.0);
    EXPECT_LE(*s.incorrect_coverage, 1.0);
}

TEST(RunExperiment, CdfBandRejectsSupervised) {
    MethodSpec band;
    band.kind = MethodKind::cdf_band;
    EXPECT_THROW((void)run_experiment(SupDesign{20, 30, 1.0, 0.1}, "sup", band, {5, 1, 1}), PreconditionError);
}

TEST(MonteCarloSe, Formula) {
    EXPECT_NEAR(monte_carlo_se(0.9, 500), std::sqrt(0.9 * 0.1 / 500.0), 1e-15);
    EXPECT_EQ(monte_carlo_se(1.0, 10), 0.0);
}

TEST(Shrinkage, SetupTwoJamesSteinIsSmaller) {
    const auto rows = shrinkage_experiment(2, {500}, 0.1, {100, 8, 1});
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_LT(rows[0].james_stein.mean_size, rows[0].group_mean.mean_size);
    EXPECT_EQ(rows[0].james_stein.data_digest, rows[0].group_mean.data_digest);
}

TEST(Shrinkage, SetupOneCoverageAndMinimalK) {
    const auto rows = shrinkage_experiment(1, {4, 50}, 0.1, {500, 9, 1});
    ASSERT_EQ(rows.size(), 2u);
    const auto& k4 = rows[0];
    EXPECT_LT(k4.james_stein.mean_size, 2.0 * k4.group_mean.mean_size);
    EXPECT_LT(k4.group_mean.mean_size, 2.0 * k4.james_stein.mean_size);
    for (const auto& r : rows) {
        EXPECT_GE(r.group_mean.coverage, 0.88);
        EXPECT_GE(r.james_stein.coverage, 0.88);
    }
    EXPECT_THROW((void)shrinkage_experiment(1, {3}, 0.1, {10, 1, 1}), PreconditionError);
}
