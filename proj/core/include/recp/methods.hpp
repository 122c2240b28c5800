#pragma once

// Prediction sets for grouped (random-effects) data. Unsupervised methods
// predict an observation from a new group; supervised ones predict a binary
// label at x_star for a new group; within_group_conformal predicts a new
// observation from an already observed group.

#include <cstddef>
#include <span>
#include <vector>

#include "recp/conformal.hpp"
#include "recp/interval_set.hpp"
#include "recp/kde2d.hpp"
#include "recp/random.hpp"
#include "recp/working_models.hpp"

namespace recp {

using GroupedSample = std::vector<std::vector<double>>;
using LabeledGroups = std::vector<std::vector<LabeledPoint>>;

enum class SetStatus {
    computed,
    guaranteed_full,  // 1/(k+1) already meets the test level: whole space, no data used
    empty_region,     // the conformal region over (theta, t) was empty
    vacuous_band,     // CDF band radius >= 1 (or too few groups to calibrate)
};

[[nodiscard]] const char* to_string(SetStatus s) noexcept;

struct IntervalPrediction {
    IntervalSet set;
    SetStatus status = SetStatus::computed;
};

struct LabelPrediction {
    LabelSet set;
    SetStatus status = SetStatus::computed;
};

enum class RandomSetVariant { mean, kde };
enum class WithinEstimator { group_mean, james_stein };

// t lattices searched by the random-set constructions.
[[nodiscard]] std::vector<double> gaussian_t_grid();  // 0.001, 0.002, ..., 0.398
[[nodiscard]] std::vector<double> logistic_t_grid();  // 0, 0.01, ..., 1

// Conformal p-value of `candidate` among `pairs` under the standardized
// residual |theta_i - mean| / s_theta + |t_i - mean| / s_t, with means and
// sample standard deviations of the augmented set (zero spread replaced by
// machine epsilon).
[[nodiscard]] PValue pair_pvalue(std::span<const LevelSetPair> pairs, LevelSetPair candidate);

// Interval of theta with pair p-value >= epsilon at a fixed t, found by
// bisection outward from the mean of the fitted thetas. `found` is false
// when t is excluded from the region.
struct ThetaSection {
    bool found = false;
    double lo = 0.0;
    double hi = 0.0;
};
[[nodiscard]] ThetaSection theta_section(std::span<const LevelSetPair> pairs, double t, double epsilon);

[[nodiscard]] IntervalPrediction naive_unsup(const GroupedSample& data, double alpha);

[[nodiscard]] IntervalPrediction subsample_unsup(const GroupedSample& data, double alpha, std::size_t n_subsamples,
                                                 Rng& rng);

[[nodiscard]] IntervalPrediction randomset_mean_unsup(const GroupedSample& data, double delta, double epsilon,
                                                      Rng& rng);

[[nodiscard]] IntervalPrediction randomset_kde_unsup(const GroupedSample& data, double delta, double epsilon,
                                                     Rng& rng, const GridSpec& grid = {});

// Split-conformal KS band around the averaged empirical CDF, inverted at
// beta/2 and 1 - beta/2.
[[nodiscard]] IntervalPrediction cdf_band(const GroupedSample& data, double beta, double gamma);

[[nodiscard]] LabelPrediction naive_sup(const LabeledGroups& data, double x_star, double alpha,
                                        const LogisticFitter& fitter);

[[nodiscard]] LabelPrediction subsample_sup(const LabeledGroups& data, double x_star, double alpha,
                                            std::size_t n_subsamples, const LogisticFitter& fitter, Rng& rng);

[[nodiscard]] LabelPrediction randomset_sup(const LabeledGroups& data, double x_star, double delta, double epsilon,
                                            RandomSetVariant variant, const LogisticFitter& fitter, Rng& rng,
                                            const GridSpec& grid = {});

// Full conformal on one group with residual |Y_i - mu_hat|, mu_hat being the
// augmented group mean or its James-Stein shrinkage (known variance sigma2,
// per-group size taken from the target group).
[[nodiscard]] IntervalPrediction within_group_conformal(const GroupedSample& data, std::size_t group_index,
                                                        double alpha, WithinEstimator estimator,
                                                        double sigma2 = 1.0);

// Kolmogorov-Smirnov distance between two right-continuous step CDFs given
// by sorted jump locations and cumulative values at those locations.
[[nodiscard]] double ks_distance(std::span<const double> xs_a, std::span<const double> cdf_a,
                                 std::span<const double> xs_b, std::span<const double> cdf_b);

} // namespace recp
