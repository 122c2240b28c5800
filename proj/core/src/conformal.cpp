#include "recp/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "recp/error.hpp"
#include "recp/root_find.hpp"

namespace recp {

bool meets_level(std::size_t count, std::size_t total, double level) noexcept {
    return static_cast<double>(count) >= level * static_cast<double>(total) - 1e-9;
}

bool PValue::meets(double level) const noexcept { return meets_level(count, total, level); }

namespace {

void validate_sample(std::span<const double> sample, const char* who) {
    detail::require(!sample.empty(), std::string(who) + ": empty sample");
    for (double v : sample) {
        if (!std::isfinite(v)) throw PreconditionError(std::string(who) + ": non-finite value");
    }
}

void validate_rate(double rate, const char* who, const char* name) {
    detail::require(rate > 0.0 && rate < 1.0, std::string(who) + ": " + name + " must lie in (0,1)");
}

// |y - center| less a rounding allowance, so residuals that tie in exact
// arithmetic are counted as ties.
double tie_floor(double y, double center) noexcept {
    return std::abs(y - center) - 1e-12 * (std::abs(y) + 2.0 * std::abs(center));
}

} // namespace

PValue conformal_pvalue_mean(std::span<const double> sample, double y) {
    validate_sample(sample, "conformal_pvalue_mean");
    detail::require(std::isfinite(y), "conformal_pvalue_mean: y must be finite");
    const std::size_t m = sample.size();
    const double sum = std::accumulate(sample.begin(), sample.end(), 0.0);
    const double center = (sum + y) / static_cast<double>(m + 1);
    const double own = tie_floor(y, center);
    std::size_t count = 1;  // the augmented point always ties with itself
    for (double v : sample) {
        if (std::abs(v - center) >= own) ++count;
    }
    return {count, m + 1};
}

MeanResidualScorer::MeanResidualScorer(std::span<const double> sample)
    : sorted_(sample.begin(), sample.end()) {
    validate_sample(sample, "MeanResidualScorer");
    sum_ = std::accumulate(sample.begin(), sample.end(), 0.0);
    std::sort(sorted_.begin(), sorted_.end());
}

PValue MeanResidualScorer::pvalue(double y) const {
    const std::size_t m = sorted_.size();
    const double center = (sum_ + y) / static_cast<double>(m + 1);
    const double own = tie_floor(y, center);
    if (own <= 0.0) return {m + 1, m + 1};
    // Points far below the center form a prefix of the sorted sample, points
    // far above it a suffix; the predicates mirror the direct comparison.
    const auto low_end = std::partition_point(sorted_.begin(), sorted_.end(),
                                              [&](double v) { return v < center && std::abs(v - center) >= own; });
    const auto high_begin = std::partition_point(
        low_end, sorted_.end(), [&](double v) { return !(v > center && std::abs(v - center) >= own); });
    const auto low = static_cast<std::size_t>(low_end - sorted_.begin());
    const auto high = static_cast<std::size_t>(sorted_.end() - high_begin);
    return {low + high + 1, m + 1};
}

IntervalSet conformal_interval_mean(std::span<const double> sample, double alpha) {
    validate_sample(sample, "conformal_interval_mean");
    validate_rate(alpha, "conformal_interval_mean", "alpha");
    if (guaranteed_full(sample.size() + 1, alpha)) return IntervalSet::whole_line();

    const MeanResidualScorer scorer(sample);
    const double center = scorer.mean();
    const auto inside = [&](double y) { return scorer.pvalue(y).meets(alpha); };
    if (!inside(center)) return IntervalSet::empty();

    const double scale = scorer.range() + 1.0;
    const BoundarySearch opts{scale / 16.0, 65536.0 * scale, 1e-6};
    const double lo = find_boundary(inside, center, -1, opts);
    const double hi = find_boundary(inside, center, +1, opts);
    return IntervalSet::single(lo, hi);
}

double split_conformal_threshold(std::span<const double> scores, double alpha) {
    validate_sample(scores, "split_conformal_threshold");
    validate_rate(alpha, "split_conformal_threshold", "alpha");
    const auto n = scores.size();
    const auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * (1.0 - alpha) - 1e-9));
    detail::require(m <= n, "split_conformal_threshold: ceil(n(1-alpha)) exceeds n; alpha too small for n");
    std::vector<double> r(scores.begin(), scores.end());
    const std::size_t rank = std::max<std::size_t>(m, 1);
    std::nth_element(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(rank - 1), r.end());
    return r[rank - 1];
}

namespace {

PValue binary_pvalue_fitted(std::span<const LabeledPoint> augmented, double theta) {
    const auto& last = augmented.back();
    const double own = std::abs(logistic(theta * last.x) - last.y);
    std::size_t count = 0;
    for (const auto& p : augmented) {
        if (std::abs(logistic(theta * p.x) - p.y) >= own) ++count;
    }
    return {count, augmented.size()};
}

} // namespace

PValue binary_conformal_pvalue(std::span<const LabeledPoint> pairs, double x_star, int y,
                               const LogisticFitter& fitter) {
    detail::require(!pairs.empty(), "binary_conformal_pvalue: no pairs");
    detail::require(y == 0 || y == 1, "binary_conformal_pvalue: y must be 0 or 1");
    std::vector<LabeledPoint> augmented(pairs.begin(), pairs.end());
    augmented.push_back({x_star, y});
    const double theta = fitter.fit(augmented).theta_hat;
    return binary_pvalue_fitted(augmented, theta);
}

LabelSet binary_conformal_set(std::span<const LabeledPoint> pairs, double x_star, double alpha,
                              const LogisticFitter& fitter) {
    detail::require(!pairs.empty(), "binary_conformal_set: no pairs");
    validate_rate(alpha, "binary_conformal_set", "alpha");
    if (guaranteed_full(pairs.size() + 1, alpha)) return LabelSet::both();

    std::vector<LabeledPoint> augmented(pairs.begin(), pairs.end());
    augmented.push_back({x_star, 0});
    const double theta0 = fitter.fit(augmented).theta_hat;
    const bool zero = binary_pvalue_fitted(augmented, theta0).meets(alpha);

    augmented.back().y = 1;
    // One label flip moves the optimum only slightly; start Newton there.
    const double theta1 = fitter.fit(augmented, theta0).theta_hat;
    const bool one = binary_pvalue_fitted(augmented, theta1).meets(alpha);
    return {zero, one};
}

} // namespace recp
