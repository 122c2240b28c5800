#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "recp/conformal.hpp"
#include "recp/error.hpp"

using namespace recp;

namespace {

// pi(y) straight from the definition, with no shared code.
double pvalue_oracle(const std::vector<double>& s, double y) {
    std::vector<double> a = s;
    a.push_back(y);
    const double c = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
    const double own = std::abs(y - c);
    std::size_t count = 0;
    for (double v : a)
        if (std::abs(v - c) >= own - 1e-12) ++count;
    return static_cast<double>(count) / static_cast<double>(a.size());
}

} // namespace

TEST(ConformalPValue, AtSampleMeanIsOne) {
    const std::vector<double> s{0.3, -1.2, 2.5, 0.9};
    const double c = std::accumulate(s.begin(), s.end(), 0.0) / 4.0;
    EXPECT_DOUBLE_EQ(conformal_pvalue_mean(s, c).value(), 1.0);
}

TEST(ConformalPValue, SingletonZero) {
    const std::vector<double> s{0.0};
    EXPECT_DOUBLE_EQ(conformal_pvalue_mean(s, 0.0).value(), 1.0);
}

TEST(ConformalPValue, HandWorkedExample) {
    const std::vector<double> s{0.0, 1.0, 2.0};
    const auto p = conformal_pvalue_mean(s, 10.0);
    EXPECT_EQ(p.count, 1u);
    EXPECT_EQ(p.total, 4u);
}

TEST(ConformalPValue, ScorerMatchesDirect) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> z;
    std::vector<double> s(57);
    for (double& v : s) v = z(rng);
    const MeanResidualScorer scorer(s);
    for (int i = 0; i < 400; ++i) {
        const double y = -6.0 + 12.0 * i / 399.0;
        const auto a = conformal_pvalue_mean(s, y);
        const auto b = scorer.pvalue(y);
        EXPECT_EQ(a.count, b.count) << "y=" << y;
        EXPECT_EQ(a.total, b.total);
        EXPECT_NEAR(a.value(), pvalue_oracle(s, y), 1e-12) << "y=" << y;
    }
}

TEST(ConformalPValue, UnimodalAlongAGrid) {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> z(1.0, 2.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> s(25);
        for (double& v : s) v = z(rng);
        const MeanResidualScorer scorer(s);
        std::vector<double> p;
        for (int i = 0; i <= 2000; ++i) p.push_back(scorer.pvalue(-15.0 + 30.0 * i / 2000.0).value());
        const auto peak = std::max_element(p.begin(), p.end()) - p.begin();
        for (long i = 1; i <= peak; ++i) EXPECT_LE(p[i - 1], p[i]);
        for (std::size_t i = static_cast<std::size_t>(peak) + 1; i < p.size(); ++i) EXPECT_GE(p[i - 1], p[i]);
    }
}

TEST(ConformalInterval, SmallAlphaGivesWholeLine) {
    const std::vector<double> s{1.0, 2.0, 3.0, 4.0};
    EXPECT_TRUE(conformal_interval_mean(s, 0.2).is_whole_line());
    EXPECT_FALSE(conformal_interval_mean(s, 0.21).is_whole_line());
}

TEST(ConformalInterval, ContainsMean) {
    const std::vector<double> s{0.0, 1.0, 2.0};
    EXPECT_TRUE(conformal_interval_mean(s, 0.9).contains(1.0));
}

TEST(ConformalInterval, MatchesGridBruteForce) {
    // Brute force on y in [-10, 10] step 1e-4 gives [-1, 3].
    const std::vector<double> s{0.0, 1.0, 2.0};
    const auto set = conformal_interval_mean(s, 0.5);
    ASSERT_EQ(set.piece_count(), 1u);
    EXPECT_NEAR(set.intervals()[0].lo, -1.0, 1e-3);
    EXPECT_NEAR(set.intervals()[0].hi, 3.0, 1e-3);
}

TEST(ConformalInterval, RandomSampleAgreesWithOracleGrid) {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> z;
    std::vector<double> s(30);
    for (double& v : s) v = z(rng);
    const double alpha = 0.1;
    const auto set = conformal_interval_mean(s, alpha);
    double lo = 1e9, hi = -1e9;
    for (int i = 0; i <= 200000; ++i) {
        const double y = -10.0 + 1e-4 * i;
        if (pvalue_oracle(s, y) >= alpha - 1e-12) {
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
    }
    ASSERT_EQ(set.piece_count(), 1u);
    EXPECT_NEAR(set.intervals()[0].lo, lo, 1e-3);
    EXPECT_NEAR(set.intervals()[0].hi, hi, 1e-3);
}

TEST(SplitThreshold, OrderStatistics) {
    const std::vector<double> a{5.0, 1.0, 4.0, 2.0, 3.0};
    EXPECT_DOUBLE_EQ(split_conformal_threshold(a, 0.2), 4.0);
    const std::vector<double> b{7.0};
    EXPECT_DOUBLE_EQ(split_conformal_threshold(b, 0.5), 7.0);
}

TEST(SplitThreshold, UniformDraws) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u;
    std::vector<double> s(100);
    for (double& v : s) v = u(rng);
    const double r = split_conformal_threshold(s, 0.1);
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(r, sorted[89]);
    const auto below = std::count_if(s.begin(), s.end(), [&](double v) { return v <= r; });
    EXPECT_GE(below, 90);
}

TEST(MeetsLevel, ExactMultiplesSurviveRounding) {
    // 0.1 / 1 with 10 points: 1/10 must count as reaching 0.1.
    EXPECT_TRUE(meets_level(1, 10, 0.1));
    EXPECT_TRUE(guaranteed_full(10, 0.1));
    EXPECT_FALSE(guaranteed_full(11, 0.1));
    EXPECT_TRUE(guaranteed_full(20, 0.1 / 2.0));
    EXPECT_FALSE(guaranteed_full(21, 0.1 / 2.0));
}

TEST(BinaryConformal, FewPointsGiveBothLabels) {
    // k + 1 <= 1/alpha: every p-value is at least alpha.
    const std::vector<LabeledPoint> pairs{{0.5, 1}, {-0.3, 0}, {1.2, 1}};
    const auto set = binary_conformal_set(pairs, 0.7, 0.25, LogisticFitter::map());
    EXPECT_EQ(set, LabelSet::both());
}

TEST(BinaryConformal, PositiveLabelsAtLargePositiveX) {
    std::vector<LabeledPoint> pairs;
    for (int i = 1; i <= 30; ++i) pairs.push_back({0.1 * i, 1});
    const auto set = binary_conformal_set(pairs, 5.0, 0.5, LogisticFitter::map());
    EXPECT_TRUE(set.contains(1));
}

TEST(BinaryConformal, AgreesWithDefinition) {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u;
    std::vector<LabeledPoint> pairs;
    for (int i = 0; i < 20; ++i) {
        const double x = z(rng);
        pairs.push_back({x, u(rng) < logistic(5.0 * x) ? 1 : 0});
    }
    const double x_star = 2.0;
    const auto fitter = LogisticFitter::map();
    for (int y : {0, 1}) {
        std::vector<LabeledPoint> aug = pairs;
        aug.push_back({x_star, y});
        const double theta = fitter.fit(aug).theta_hat;
        std::vector<double> r;
        for (const auto& p : aug) r.push_back(std::abs(1.0 / (1.0 + std::exp(-theta * p.x)) - p.y));
        std::size_t count = 0;
        for (double v : r)
            if (v >= r.back() - 1e-12) ++count;
        const auto pv = binary_conformal_pvalue(pairs, x_star, y, fitter);
        EXPECT_EQ(pv.count, count) << "y=" << y;
        EXPECT_EQ(pv.total, aug.size());
        const auto set = binary_conformal_set(pairs, x_star, 0.1, fitter);
        EXPECT_EQ(set.contains(y), static_cast<double>(count) / 21.0 >= 0.1);
    }
}

TEST(ConformalPreconditions, EmptySampleRejected) {
    const std::vector<double> none;
    EXPECT_THROW((void)conformal_pvalue_mean(none, 0.0), PreconditionError);
    EXPECT_THROW((void)split_conformal_threshold(none, 0.1), PreconditionError);
}

TEST(ConformalProperties, PValueRange) {
    std::mt19937_64 rng(51);
    std::normal_distribution<double> z;
    std::vector<double> s(12);
    for (double& v : s) v = z(rng);
    const MeanResidualScorer scorer(s);
    for (int i = -500; i <= 500; ++i) {
        const double p = scorer.pvalue(0.02 * i).value();
        EXPECT_GE(p, 1.0 / 13.0 - 1e-15);
        EXPECT_LE(p, 1.0);
    }
    EXPECT_DOUBLE_EQ(scorer.pvalue(scorer.mean()).value(), 1.0);
}

TEST(ConformalProperties, MarginalCoverage) {
    std::mt19937_64 rng(61);
    std::normal_distribution<double> z;
    int in = 0;
    const int reps = 2000;
    for (int r = 0; r < reps; ++r) {
        std::vector<double> s(20);
        for (double& v : s) v = z(rng);
        in += conformal_interval_mean(s, 0.1).contains(z(rng));
    }
    const double cov = static_cast<double>(in) / reps;
    EXPECT_GE(cov, 0.88);
    EXPECT_LE(cov, 0.95);
}

TEST(ConformalProperties, InversionConsistency) {
    std::mt19937_64 rng(71);
    std::normal_distribution<double> z(2.0, 3.0);
    for (int rep = 0; rep < 25; ++rep) {
        std::vector<double> s(15 + rep);
        for (double& v : s) v = z(rng);
        for (double alpha : {0.08, 0.1, 0.3}) {
            const auto set = conformal_interval_mean(s, alpha);
            ASSERT_EQ(set.piece_count(), 1u);
            const auto [lo, hi] = set.intervals()[0];
            for (int i = 0; i <= 50; ++i) {
                const double y = lo + (hi - lo) * i / 50.0;
                EXPECT_GE(conformal_pvalue_mean(s, y).value(), alpha);
            }
            EXPECT_LT(conformal_pvalue_mean(s, lo - 1e-3).value(), alpha);
            EXPECT_LT(conformal_pvalue_mean(s, hi + 1e-3).value(), alpha);
        }
    }
}

TEST(ConformalProperties, SplitThresholdMatchesSort) {
    std::mt19937_64 rng(81);
    std::uniform_real_distribution<double> u;
    for (std::size_t n = 1; n <= 100; ++n) {
        std::vector<double> s(n);
        for (double& v : s) v = u(rng);
        auto sorted = s;
        std::sort(sorted.begin(), sorted.end());
        for (double alpha = 0.01; alpha < 1.0; alpha += 0.07) {
            const auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * (1.0 - alpha)));
            if (m < 1) continue;
            EXPECT_EQ(split_conformal_threshold(s, alpha), sorted[m - 1]) << "n=" << n << " alpha=" << alpha;
        }
    }
}
