#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "recp/conformal.hpp"
#include "recp/kde2d.hpp"
#include "recp/methods.hpp"
#include "recp/simlab.hpp"

using namespace recp;

namespace {

GroupedSample groups(std::size_t k, std::size_t n) {
    Rng rng(1);
    return gen_unsup(UnsupDesign::balanced(k, n), rng).groups;
}

} // namespace

static void BM_ScorerPValue(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z;
    std::vector<double> s(static_cast<std::size_t>(state.range(0)));
    for (double& v : s) v = z(rng);
    const MeanResidualScorer scorer(s);
    double y = -3.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(scorer.pvalue(y));
        y = y > 3.0 ? -3.0 : y + 1e-3;
    }
}
BENCHMARK(BM_ScorerPValue)->Arg(1000)->Arg(500000);

static void BM_NaiveUnsup(benchmark::State& state) {
    const auto g = groups(static_cast<std::size_t>(state.range(0)), 500);
    for (auto _ : state) benchmark::DoNotOptimize(naive_unsup(g, 0.1));
}
BENCHMARK(BM_NaiveUnsup)->Arg(5)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_SubsampleUnsup(benchmark::State& state) {
    const auto g = groups(1000, 500);
    Rng rng(3);
    for (auto _ : state) benchmark::DoNotOptimize(subsample_unsup(g, 0.1, static_cast<std::size_t>(state.range(0)), rng));
}
BENCHMARK(BM_SubsampleUnsup)->Arg(1)->Arg(10);

static void BM_RandomSetMean(benchmark::State& state) {
    const auto g = groups(static_cast<std::size_t>(state.range(0)), 500);
    Rng rng(4);
    for (auto _ : state) benchmark::DoNotOptimize(randomset_mean_unsup(g, 0.05, 0.05, rng));
}
BENCHMARK(BM_RandomSetMean)->Arg(50)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_RandomSetKde(benchmark::State& state) {
    const auto g = groups(static_cast<std::size_t>(state.range(0)), 500);
    Rng rng(5);
    for (auto _ : state) benchmark::DoNotOptimize(randomset_kde_unsup(g, 0.05, 0.05, rng));
}
BENCHMARK(BM_RandomSetKde)->Arg(20)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_MassLevel(benchmark::State& state) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> z;
    std::vector<Point2> pts(static_cast<std::size_t>(state.range(0)));
    for (auto& p : pts) p = {z(rng), z(rng)};
    const auto kde = Kde2d::fit(pts);
    for (auto _ : state) benchmark::DoNotOptimize(mass_level(kde, 0.05));
}
BENCHMARK(BM_MassLevel)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_LogisticMap(benchmark::State& state) {
    Rng rng(7);
    const auto d = gen_sup(SupDesign{1, static_cast<std::size_t>(state.range(0)), 1.0, 0.1}, rng);
    const auto fitter = LogisticFitter::map();
    for (auto _ : state) benchmark::DoNotOptimize(fitter.fit(d.groups[0]));
}
BENCHMARK(BM_LogisticMap)->Arg(500)->Arg(500000)->Unit(benchmark::kMicrosecond);

static void BM_NaiveSup(benchmark::State& state) {
    Rng rng(8);
    const auto d = gen_sup(SupDesign{static_cast<std::size_t>(state.range(0)), 500, 1.0, 0.1}, rng);
    const auto fitter = LogisticFitter::map();
    for (auto _ : state) benchmark::DoNotOptimize(naive_sup(d.groups, d.x_star, 0.1, fitter));
}
BENCHMARK(BM_NaiveSup)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_Trial(benchmark::State& state) {
    const Design design = UnsupDesign::balanced(100, 500);
    MethodSpec m;
    std::size_t t = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_trial(design, m, 9, t++));
}
BENCHMARK(BM_Trial)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
