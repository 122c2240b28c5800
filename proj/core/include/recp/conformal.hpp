#pragma once

// Exchangeability-based conformal machinery: permutation p-values for the
// mean-residual score, full-conformal interval inversion, split-conformal
// thresholds and the supervised binary conformal set.

#include <cstddef>
#include <span>
#include <vector>

#include "recp/interval_set.hpp"
#include "recp/working_models.hpp"

namespace recp {

using RealSample = std::vector<double>;

// Conformal p-value count/total, total = (augmented sample size).
struct PValue {
    std::size_t count = 0;
    std::size_t total = 1;

    [[nodiscard]] double value() const noexcept {
        return static_cast<double>(count) / static_cast<double>(total);
    }
    [[nodiscard]] bool meets(double level) const noexcept;
};

// count/total >= level, compared in count units with a 1e-9 slack so that
// levels such as alpha/N that are exact multiples of 1/total are not lost to
// rounding.
[[nodiscard]] bool meets_level(std::size_t count, std::size_t total, double level) noexcept;

// True when the smallest attainable p-value 1/total already reaches `level`;
// the prediction set is then the whole space regardless of the data.
[[nodiscard]] inline bool guaranteed_full(std::size_t total, double level) noexcept {
    return meets_level(1, total, level);
}

// pi(y) = #{i <= m+1 : |Y_i - mean_y| >= |y - mean_y|} / (m+1), where the
// sample is augmented with Y_{m+1} = y. Direct O(m) evaluation.
[[nodiscard]] PValue conformal_pvalue_mean(std::span<const double> sample, double y);

// Same p-value as conformal_pvalue_mean, answered in O(log m) per query from
// a sorted copy of the sample. Results are identical to the direct form.
class MeanResidualScorer {
public:
    explicit MeanResidualScorer(std::span<const double> sample);

    [[nodiscard]] PValue pvalue(double y) const;
    [[nodiscard]] std::size_t size() const noexcept { return sorted_.size(); }
    [[nodiscard]] double mean() const noexcept { return sum_ / static_cast<double>(sorted_.size()); }
    [[nodiscard]] double range() const noexcept { return sorted_.back() - sorted_.front(); }

private:
    std::vector<double> sorted_;
    double sum_ = 0.0;
};

// {y : pi(y) >= alpha}. A single interval around the sample mean, located by
// doubling outward from the mean and bisecting to 1e-6; the whole line when
// alpha <= 1/(m+1).
[[nodiscard]] IntervalSet conformal_interval_mean(std::span<const double> sample, double alpha);

// R_(m) with m = ceil(n(1 - alpha)). Throws PreconditionError when m > n.
[[nodiscard]] double split_conformal_threshold(std::span<const double> scores, double alpha);

// pi(y) for the binary label y at x_star: refit the logistic working model on
// the augmented pairs and rank R_i = |mu_hat(X_i) - Y_i|.
[[nodiscard]] PValue binary_conformal_pvalue(std::span<const LabeledPoint> pairs, double x_star, int y,
                                             const LogisticFitter& fitter);

[[nodiscard]] LabelSet binary_conformal_set(std::span<const LabeledPoint> pairs, double x_star, double alpha,
                                            const LogisticFitter& fitter);

} // namespace recp
