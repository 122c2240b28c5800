#pragma once

// Parametric working models used to build conformity scores and level sets:
// the unit-variance Gaussian, the intercept-free one-parameter logistic model
// (plain MLE or MAP under a Student-t prior), calibrated level sets, and the
// positive-part James-Stein estimator.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "recp/interval_set.hpp"
#include "recp/random.hpp"

namespace recp {

struct LabeledPoint {
    double x = 0.0;
    int y = 0;  // 0 or 1
};

struct GaussianModel {
    double theta_hat = 0.0;
};

struct LogisticModel {
    double theta_hat = 0.0;
};

struct TPrior {
    double df = 1.0;
    double scale = 2.5;
    double location = 0.0;
};

// Fitted parameter and density threshold of one group's level set.
struct LevelSetPair {
    double theta_hat = 0.0;
    double t = 0.0;
};

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

[[nodiscard]] double gaussian_density(double y, double theta) noexcept;

[[nodiscard]] GaussianModel fit_gaussian_mean(std::span<const double> sample);

// Half-width r with N(theta,1) density equal to t at theta +/- r. Negative
// (no solution) when t exceeds the density maximum.
[[nodiscard]] double gaussian_level_radius(double t) noexcept;

// {y : N(theta_hat, 1) density >= t} = [theta_hat - r, theta_hat + r]; empty
// when t > 1/sqrt(2 pi), the single point theta_hat when t equals it.
[[nodiscard]] IntervalSet gaussian_level_interval(const LevelSetPair& pair);

// Z_(m), m = floor(n beta), of the working-model densities at the data.
[[nodiscard]] double level_set_threshold(std::span<const double> density_values, double beta);

// Smallest density value z_i whose count #{l : z_l <= z_i} exceeds
// (|I|+1) delta - 1. `densities` are the calibration-half values.
[[nodiscard]] double calibrated_threshold(std::span<const double> densities, double delta);

// Random half split of a group: the mean of the first ceil(n/2) shuffled
// points is theta_hat, the rest calibrate t through calibrated_threshold.
[[nodiscard]] LevelSetPair split_level_set(std::span<const double> group, double delta, Rng& rng);

[[nodiscard]] double logistic(double z) noexcept;

// p(y | x; theta) under P(Y = 1 | x) = logistic(theta x).
[[nodiscard]] double logistic_conditional(int y, double x, double theta) noexcept;

// Maximizes sum_i [y_i theta x_i - log(1 + exp(theta x_i))] + log prior(theta)
// by Newton iteration with step halving, falling back to golden-section
// search on [-1e3, 1e3] if Newton stalls. Without a prior this is the MLE,
// which throws FitError on separated or uninformative data.
class LogisticFitter {
public:
    LogisticFitter() = default;
    explicit LogisticFitter(std::optional<TPrior> prior) : prior_(prior) {}

    static LogisticFitter mle() { return LogisticFitter(std::nullopt); }
    static LogisticFitter map(TPrior prior = {}) { return LogisticFitter(prior); }

    [[nodiscard]] LogisticModel fit(std::span<const LabeledPoint> pairs) const;
    [[nodiscard]] LogisticModel fit(std::span<const LabeledPoint> pairs, double start) const;

    [[nodiscard]] double objective(std::span<const LabeledPoint> pairs, double theta) const;
    [[nodiscard]] double gradient(std::span<const LabeledPoint> pairs, double theta) const;

    [[nodiscard]] const std::optional<TPrior>& prior() const noexcept { return prior_; }

    int max_iterations = 100;
    double gradient_tolerance = 1e-8;

private:
    std::optional<TPrior> prior_ = TPrior{};
};

[[nodiscard]] LogisticModel fit_logistic_map(std::span<const LabeledPoint> pairs, const TPrior& prior = {});
[[nodiscard]] LogisticModel fit_logistic_mle(std::span<const LabeledPoint> pairs);

// Split level set for the logistic working model: fit theta on the first
// half, calibrate t on p(y_i | x_i; theta_hat) of the second half.
[[nodiscard]] LevelSetPair split_level_set_logistic(std::span<const LabeledPoint> group, double delta,
                                                    const LogisticFitter& fitter, Rng& rng);

// Positive-part James-Stein toward the grand mean with known sampling
// variance sigma2 / n_per_group:
//   mu_j = g + max(0, 1 - (k-3)(sigma2/n) / S) (ybar_j - g),  S = sum (ybar_j - g)^2.
// S = 0 returns g for every group. Requires k >= 4.
[[nodiscard]] std::vector<double> james_stein(std::span<const double> group_means, double sigma2,
                                              std::size_t n_per_group);

} // namespace recp
