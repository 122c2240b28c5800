#include "recp/working_models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "recp/error.hpp"

namespace recp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + exp(z)) without overflow.
double softplus(double z) noexcept {
    return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double prior_log_density(const TPrior& p, double theta) noexcept {
    const double z = (theta - p.location) / p.scale;
    return -0.5 * (p.df + 1.0) * std::log1p(z * z / p.df);
}

double prior_gradient(const TPrior& p, double theta) noexcept {
    const double z = (theta - p.location) / p.scale;
    return -(p.df + 1.0) * z / (p.scale * (p.df + z * z));
}

double prior_curvature(const TPrior& p, double theta) noexcept {
    const double z = (theta - p.location) / p.scale;
    const double denom = p.df + z * z;
    return -(p.df + 1.0) * (p.df - z * z) / (p.scale * p.scale * denom * denom);
}

struct Local {
    double value = 0.0;
    double gradient = 0.0;
    double curvature = 0.0;
};

// Log-likelihood with first and second derivatives in one pass; one exp and
// one log1p per pair.
Local likelihood_local(std::span<const LabeledPoint> pairs, double theta) noexcept {
    Local out;
    for (const auto& p : pairs) {
        const double eta = theta * p.x;
        const double e = std::exp(-std::abs(eta));
        const double mu = eta >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
        out.value += (p.y == 1 ? eta : 0.0) - (std::max(eta, 0.0) + std::log1p(e));
        out.gradient += p.x * (static_cast<double>(p.y) - mu);
        out.curvature -= p.x * p.x * mu * (1.0 - mu);
    }
    return out;
}

void validate_pairs(std::span<const LabeledPoint> pairs) {
    detail::require(!pairs.empty(), "logistic fit: no data");
    for (const auto& p : pairs) {
        detail::require(std::isfinite(p.x), "logistic fit: non-finite x");
        detail::require(p.y == 0 || p.y == 1, "logistic fit: labels must be 0 or 1");
    }
}

// The one-parameter likelihood has no finite maximizer when every x > 0
// carries one label and every x < 0 the other (or when all x are 0).
void check_identifiable(std::span<const LabeledPoint> pairs) {
    bool all_zero = true;
    bool up = true;    // likelihood increases without bound as theta -> +inf
    bool down = true;  // ... as theta -> -inf
    for (const auto& p : pairs) {
        if (p.x == 0.0) continue;
        all_zero = false;
        const bool agrees = (p.x > 0.0) == (p.y == 1);
        up = up && agrees;
        down = down && !agrees;
    }
    if (all_zero) throw FitError("logistic MLE: all covariates are zero, likelihood is flat");
    if (up || down) throw FitError("logistic MLE: outcomes are perfectly separated, no finite estimate");
}

double golden_section_max(auto&& f, double lo, double hi, double tol) {
    constexpr double kRatio = 0.61803398874989484820;
    double a = lo;
    double b = hi;
    double c = b - kRatio * (b - a);
    double d = a + kRatio * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (b - a > tol) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kRatio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kRatio * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

} // namespace

double gaussian_density(double y, double theta) noexcept {
    const double d = y - theta;
    return kInvSqrt2Pi * std::exp(-0.5 * d * d);
}

GaussianModel fit_gaussian_mean(std::span<const double> sample) {
    detail::require(!sample.empty(), "fit_gaussian_mean: empty sample");
    return {std::accumulate(sample.begin(), sample.end(), 0.0) / static_cast<double>(sample.size())};
}

double gaussian_level_radius(double t) noexcept {
    if (t <= 0.0) return kInf;
    const double arg = -2.0 * std::log(t / kInvSqrt2Pi);
    if (arg < 0.0) return -1.0;
    return std::sqrt(arg);
}

IntervalSet gaussian_level_interval(const LevelSetPair& pair) {
    const double r = gaussian_level_radius(pair.t);
    if (r < 0.0) return IntervalSet::empty();
    return IntervalSet::single(pair.theta_hat - r, pair.theta_hat + r);
}

double level_set_threshold(std::span<const double> density_values, double beta) {
    detail::require(!density_values.empty(), "level_set_threshold: empty input");
    detail::require(beta > 0.0 && beta < 1.0, "level_set_threshold: beta must lie in (0,1)");
    const auto n = density_values.size();
    const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(n) * beta + 1e-9));
    detail::require(m >= 1, "level_set_threshold: floor(n*beta) is zero; lower beta or add data");
    std::vector<double> z(density_values.begin(), density_values.end());
    std::nth_element(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(m - 1), z.end());
    return z[m - 1];
}

double calibrated_threshold(std::span<const double> densities, double delta) {
    detail::require(!densities.empty(), "calibrated_threshold: empty calibration set");
    std::vector<double> z(densities.begin(), densities.end());
    std::sort(z.begin(), z.end());
    const double bar = (static_cast<double>(z.size()) + 1.0) * delta - 1.0;
    // #{l : z_l <= z_i} is non-decreasing along the sorted order, so the
    // first qualifying value is the minimum.
    for (std::size_t i = 0; i < z.size(); ++i) {
        const auto count = static_cast<std::size_t>(std::upper_bound(z.begin(), z.end(), z[i]) - z.begin());
        if (static_cast<double>(count) > bar) return z[i];
    }
    return z.back();
}

namespace {

// ceil(n/2) shuffled indices first, the remainder after.
std::vector<std::size_t> shuffled_indices(std::size_t n, Rng& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    return idx;
}

} // namespace

LevelSetPair split_level_set(std::span<const double> group, double delta, Rng& rng) {
    detail::require(group.size() >= 2, "split_level_set: group needs at least two observations");
    detail::require(delta > 0.0 && delta < 1.0, "split_level_set: delta must lie in (0,1)");
    const auto idx = shuffled_indices(group.size(), rng);
    const std::size_t n_fit = (group.size() + 1) / 2;

    double sum = 0.0;
    for (std::size_t i = 0; i < n_fit; ++i) sum += group[idx[i]];
    const double theta = sum / static_cast<double>(n_fit);

    std::vector<double> z;
    z.reserve(group.size() - n_fit);
    for (std::size_t i = n_fit; i < group.size(); ++i) z.push_back(gaussian_density(group[idx[i]], theta));
    return {theta, calibrated_threshold(z, delta)};
}

double logistic(double z) noexcept {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double logistic_conditional(int y, double x, double theta) noexcept {
    double eta = theta * x;
    if (std::isnan(eta)) eta = 0.0;  // infinite theta at x = 0
    return y == 1 ? logistic(eta) : logistic(-eta);
}

double LogisticFitter::objective(std::span<const LabeledPoint> pairs, double theta) const {
    double ll = 0.0;
    for (const auto& p : pairs) {
        const double eta = theta * p.x;
        ll += (p.y == 1 ? eta : 0.0) - softplus(eta);
    }
    if (prior_) ll += prior_log_density(*prior_, theta);
    return ll;
}

double LogisticFitter::gradient(std::span<const LabeledPoint> pairs, double theta) const {
    double g = 0.0;
    for (const auto& p : pairs) g += p.x * (static_cast<double>(p.y) - logistic(theta * p.x));
    if (prior_) g += prior_gradient(*prior_, theta);
    return g;
}

LogisticModel LogisticFitter::fit(std::span<const LabeledPoint> pairs) const {
    return fit(pairs, prior_ ? prior_->location : 0.0);
}

LogisticModel LogisticFitter::fit(std::span<const LabeledPoint> pairs, double start) const {
    validate_pairs(pairs);
    if (prior_) {
        detail::require(prior_->df > 0.0 && prior_->scale > 0.0, "t prior: df and scale must be positive");
    } else {
        check_identifiable(pairs);
    }

    const auto evaluate = [&](double theta) {
        Local l = likelihood_local(pairs, theta);
        if (prior_) {
            l.value += prior_log_density(*prior_, theta);
            l.gradient += prior_gradient(*prior_, theta);
            l.curvature += prior_curvature(*prior_, theta);
        }
        return l;
    };

    double theta = std::isfinite(start) ? start : 0.0;
    Local at = evaluate(theta);
    bool converged = false;
    for (int iter = 0; iter < max_iterations; ++iter) {
        const double g = at.gradient;
        const double h = at.curvature;
        if (std::abs(g) < gradient_tolerance) {
            converged = true;
            break;
        }
        // Non-concave region (possible under the t prior): unit ascent step.
        double step = h < 0.0 ? -g / h : (g > 0.0 ? 1.0 : -1.0);
        const double newton_step = step;
        if (h < 0.0 && std::abs(step) <= 1e-9 * (1.0 + std::abs(theta))) {
            theta += step;
            converged = true;
            break;
        }
        Local cand = evaluate(theta + step);
        int halvings = 0;
        while (!(cand.value >= at.value) && halvings < 60) {
            step *= 0.5;
            cand = evaluate(theta + step);
            ++halvings;
        }
        if (!(cand.value >= at.value)) {
            // No ascent within rounding of the objective: at the optimum.
            converged = h < 0.0 && std::abs(newton_step) <= 1e-6 * (1.0 + std::abs(theta));
            break;
        }
        theta += step;
        at = cand;
        if (std::abs(step) <= 1e-9 * (1.0 + std::abs(theta))) {
            converged = h < 0.0;
            break;
        }
        if (!std::isfinite(theta) || std::abs(theta) > 1e6) break;
    }

    if (!converged) {
        if (!prior_) throw FitError("logistic MLE: Newton iteration did not converge");
        theta = golden_section_max([&](double t) { return objective(pairs, t); }, -1e3, 1e3, 1e-10);
    }
    return {theta};
}

LogisticModel fit_logistic_map(std::span<const LabeledPoint> pairs, const TPrior& prior) {
    return LogisticFitter::map(prior).fit(pairs);
}

LogisticModel fit_logistic_mle(std::span<const LabeledPoint> pairs) { return LogisticFitter::mle().fit(pairs); }

LevelSetPair split_level_set_logistic(std::span<const LabeledPoint> group, double delta,
                                      const LogisticFitter& fitter, Rng& rng) {
    detail::require(group.size() >= 2, "split_level_set_logistic: group needs at least two pairs");
    detail::require(delta > 0.0 && delta < 1.0, "split_level_set_logistic: delta must lie in (0,1)");
    const auto idx = shuffled_indices(group.size(), rng);
    const std::size_t n_fit = (group.size() + 1) / 2;

    std::vector<LabeledPoint> fit_half;
    fit_half.reserve(n_fit);
    for (std::size_t i = 0; i < n_fit; ++i) fit_half.push_back(group[idx[i]]);
    const double theta = fitter.fit(fit_half).theta_hat;

    std::vector<double> z;
    z.reserve(group.size() - n_fit);
    for (std::size_t i = n_fit; i < group.size(); ++i) {
        const auto& p = group[idx[i]];
        z.push_back(logistic_conditional(p.y, p.x, theta));
    }
    return {theta, calibrated_threshold(z, delta)};
}

std::vector<double> james_stein(std::span<const double> group_means, double sigma2, std::size_t n_per_group) {
    const std::size_t k = group_means.size();
    detail::require(k >= 4, "james_stein: needs at least 4 groups");
    detail::require(sigma2 >= 0.0 && std::isfinite(sigma2), "james_stein: sigma2 must be finite and >= 0");
    detail::require(n_per_group >= 1, "james_stein: n_per_group must be positive");

    const double grand = std::accumulate(group_means.begin(), group_means.end(), 0.0) / static_cast<double>(k);
    double spread = 0.0;
    for (double m : group_means) spread += (m - grand) * (m - grand);
    if (spread == 0.0) return std::vector<double>(k, grand);

    const double noise = sigma2 / static_cast<double>(n_per_group);
    const double factor = std::max(0.0, 1.0 - static_cast<double>(k - 3) * noise / spread);
    std::vector<double> out;
    out.reserve(k);
    for (double m : group_means) out.push_back(grand + factor * (m - grand));
    return out;
}

} // namespace recp
