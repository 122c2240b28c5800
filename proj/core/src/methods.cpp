#include "recp/methods.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <numeric>

#include "recp/error.hpp"
#include "recp/root_find.hpp"

namespace recp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_rate(double rate, const char* who, const char* name) {
    detail::require(rate > 0.0 && rate < 1.0, std::string(who) + ": " + name + " must lie in (0,1)");
}

void validate_unsup(const GroupedSample& data, const char* who) {
    detail::require(!data.empty(), std::string(who) + ": no groups");
    for (const auto& g : data) {
        if (g.empty()) throw PreconditionError(std::string(who) + ": empty group");
        for (double v : g) {
            if (!std::isfinite(v)) throw PreconditionError(std::string(who) + ": non-finite value");
        }
    }
}

void validate_sup(const LabeledGroups& data, const char* who) {
    detail::require(!data.empty(), std::string(who) + ": no groups");
    for (const auto& g : data) {
        if (g.empty()) throw PreconditionError(std::string(who) + ": empty group");
    }
}

double spread_or_eps(double ss, std::size_t n) {
    const double s = std::sqrt(ss / static_cast<double>(n - 1));
    return s > 0.0 ? s : DBL_EPSILON;
}

// Pair p-values at a fixed t; the t part of every residual is precomputed.
class PairScorer {
public:
    PairScorer(std::span<const LevelSetPair> pairs, double t) : pairs_(pairs), u_(pairs.size()) {
        const std::size_t n = pairs.size() + 1;
        double t_sum = t;
        for (const auto& p : pairs) {
            t_sum += p.t;
            theta_sum_ += p.theta_hat;
        }
        const double t_bar = t_sum / static_cast<double>(n);
        double ss = (t - t_bar) * (t - t_bar);
        for (const auto& p : pairs) ss += (p.t - t_bar) * (p.t - t_bar);
        const double s2 = spread_or_eps(ss, n);
        for (std::size_t i = 0; i < pairs.size(); ++i) u_[i] = std::abs(pairs[i].t - t_bar) / s2;
        u_new_ = std::abs(t - t_bar) / s2;
    }

    [[nodiscard]] PValue at(double theta) const {
        const std::size_t n = pairs_.size() + 1;
        const double theta_bar = (theta_sum_ + theta) / static_cast<double>(n);
        double ss = (theta - theta_bar) * (theta - theta_bar);
        for (const auto& p : pairs_) ss += (p.theta_hat - theta_bar) * (p.theta_hat - theta_bar);
        const double s1 = spread_or_eps(ss, n);
        const double own = std::abs(theta - theta_bar) / s1 + u_new_;
        std::size_t count = 1;
        for (std::size_t i = 0; i < pairs_.size(); ++i) {
            if (std::abs(pairs_[i].theta_hat - theta_bar) / s1 + u_[i] >= own) ++count;
        }
        return {count, n};
    }

private:
    std::span<const LevelSetPair> pairs_;
    std::vector<double> u_;
    double u_new_ = 0.0;
    double theta_sum_ = 0.0;
};

// The caller's t lattice, plus the common t when every pair shares one.
std::vector<double> scan_levels(std::vector<double> grid, std::span<const LevelSetPair> pairs) {
    const bool common = std::all_of(pairs.begin(), pairs.end(), [&](const LevelSetPair& p) { return p.t == pairs.front().t; });
    if (common && !pairs.empty()) {
        grid.push_back(pairs.front().t);
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    }
    return grid;
}

std::vector<Point2> as_points(std::span<const LevelSetPair> pairs) {
    std::vector<Point2> pts;
    pts.reserve(pairs.size());
    for (const auto& p : pairs) pts.push_back({p.theta_hat, p.t});
    return pts;
}

std::vector<LevelSetPair> unsup_pairs(const GroupedSample& data, double delta, Rng& rng) {
    std::vector<LevelSetPair> pairs;
    pairs.reserve(data.size());
    for (const auto& g : data) pairs.push_back(split_level_set(g, delta, rng));
    return pairs;
}

std::vector<LevelSetPair> sup_pairs(const LabeledGroups& data, double delta, const LogisticFitter& fitter,
                                    Rng& rng) {
    std::vector<LevelSetPair> pairs;
    pairs.reserve(data.size());
    for (const auto& g : data) pairs.push_back(split_level_set_logistic(g, delta, fitter, rng));
    return pairs;
}

// Step CDF as sorted distinct jump locations and cumulative values.
struct StepCdf {
    std::vector<double> xs;
    std::vector<double> cdf;
};

StepCdf weighted_ecdf(std::vector<std::pair<double, double>> mass) {
    std::sort(mass.begin(), mass.end());
    StepCdf out;
    double acc = 0.0;
    for (const auto& [x, w] : mass) {
        acc += w;
        if (!out.xs.empty() && out.xs.back() == x) {
            out.cdf.back() = acc;
        } else {
            out.xs.push_back(x);
            out.cdf.push_back(acc);
        }
    }
    if (!out.cdf.empty()) out.cdf.back() = 1.0;
    return out;
}

StepCdf group_ecdf(std::span<const double> g) {
    std::vector<std::pair<double, double>> mass;
    mass.reserve(g.size());
    const double w = 1.0 / static_cast<double>(g.size());
    for (double v : g) mass.emplace_back(v, w);
    return weighted_ecdf(std::move(mass));
}

} // namespace

const char* to_string(SetStatus s) noexcept {
    switch (s) {
    case SetStatus::computed: return "computed";
    case SetStatus::guaranteed_full: return "guaranteed_full";
    case SetStatus::empty_region: return "empty_region";
    case SetStatus::vacuous_band: return "vacuous_band";
    }
    return "unknown";
}

std::vector<double> gaussian_t_grid() {
    std::vector<double> g;
    g.reserve(398);
    for (int i = 1; i <= 398; ++i) g.push_back(static_cast<double>(i) / 1000.0);
    return g;
}

std::vector<double> logistic_t_grid() {
    std::vector<double> g;
    g.reserve(101);
    for (int i = 0; i <= 100; ++i) g.push_back(static_cast<double>(i) / 100.0);
    return g;
}

PValue pair_pvalue(std::span<const LevelSetPair> pairs, LevelSetPair candidate) {
    detail::require(!pairs.empty(), "pair_pvalue: no pairs");
    return PairScorer(pairs, candidate.t).at(candidate.theta_hat);
}

ThetaSection theta_section(std::span<const LevelSetPair> pairs, double t, double epsilon) {
    detail::require(!pairs.empty(), "theta_section: no pairs");
    const PairScorer scorer(pairs, t);
    const auto inside = [&](double theta) { return scorer.at(theta).meets(epsilon); };

    double sum = 0.0;
    double lo = kInf;
    double hi = -kInf;
    for (const auto& p : pairs) {
        sum += p.theta_hat;
        lo = std::min(lo, p.theta_hat);
        hi = std::max(hi, p.theta_hat);
    }
    const double center = sum / static_cast<double>(pairs.size());
    if (!inside(center)) return {};

    const double scale = (hi - lo) + 1.0;
    const BoundarySearch opts{scale / 16.0, 65536.0 * scale, 1e-6};
    return {true, find_boundary(inside, center, -1, opts), find_boundary(inside, center, +1, opts)};
}

IntervalPrediction naive_unsup(const GroupedSample& data, double alpha) {
    validate_unsup(data, "naive_unsup");
    validate_rate(alpha, "naive_unsup", "alpha");
    std::vector<double> pooled;
    for (const auto& g : data) pooled.insert(pooled.end(), g.begin(), g.end());
    if (guaranteed_full(pooled.size() + 1, alpha)) return {IntervalSet::whole_line(), SetStatus::guaranteed_full};
    auto set = conformal_interval_mean(pooled, alpha);
    const auto status = set.is_empty() ? SetStatus::empty_region : SetStatus::computed;
    return {std::move(set), status};
}

IntervalPrediction subsample_unsup(const GroupedSample& data, double alpha, std::size_t n_subsamples, Rng& rng) {
    validate_unsup(data, "subsample_unsup");
    validate_rate(alpha, "subsample_unsup", "alpha");
    detail::require(n_subsamples >= 1, "subsample_unsup: N must be positive");
    const double level = alpha / static_cast<double>(n_subsamples);
    if (guaranteed_full(data.size() + 1, level)) return {IntervalSet::whole_line(), SetStatus::guaranteed_full};

    IntervalSet out = IntervalSet::whole_line();
    std::vector<double> draw(data.size());
    for (std::size_t s = 0; s < n_subsamples; ++s) {
        for (std::size_t j = 0; j < data.size(); ++j) {
            std::uniform_int_distribution<std::size_t> pick(0, data[j].size() - 1);
            draw[j] = data[j][pick(rng)];
        }
        out = out.intersect(conformal_interval_mean(draw, level));
    }
    const auto status = out.is_empty() ? SetStatus::empty_region : SetStatus::computed;
    return {std::move(out), status};
}

IntervalPrediction randomset_mean_unsup(const GroupedSample& data, double delta, double epsilon, Rng& rng) {
    validate_unsup(data, "randomset_mean_unsup");
    validate_rate(delta, "randomset_mean_unsup", "delta");
    validate_rate(epsilon, "randomset_mean_unsup", "epsilon");
    detail::require(data.size() >= 2, "randomset_mean_unsup: needs at least 2 groups");
    if (guaranteed_full(data.size() + 1, epsilon)) return {IntervalSet::whole_line(), SetStatus::guaranteed_full};

    const auto pairs = unsup_pairs(data, delta, rng);
    std::vector<Interval> pieces;
    for (double t : scan_levels(gaussian_t_grid(), pairs)) {
        const double r = gaussian_level_radius(t);
        if (r < 0.0) continue;
        const auto sec = theta_section(pairs, t, epsilon);
        if (sec.found) pieces.push_back({sec.lo - r, sec.hi + r});
    }
    if (pieces.empty()) return {IntervalSet::empty(), SetStatus::empty_region};
    return {IntervalSet(std::move(pieces)), SetStatus::computed};
}

IntervalPrediction randomset_kde_unsup(const GroupedSample& data, double delta, double epsilon, Rng& rng,
                                       const GridSpec& grid) {
    validate_unsup(data, "randomset_kde_unsup");
    validate_rate(delta, "randomset_kde_unsup", "delta");
    validate_rate(epsilon, "randomset_kde_unsup", "epsilon");
    detail::require(data.size() >= 4, "randomset_kde_unsup: needs at least 4 groups");
    if (guaranteed_full(data.size() + 1, epsilon)) return {IntervalSet::whole_line(), SetStatus::guaranteed_full};

    const auto pairs = unsup_pairs(data, delta, rng);
    const auto kde = Kde2d::fit(as_points(pairs));
    const auto level = mass_level(kde, epsilon, grid);
    const auto ts = gaussian_t_grid();
    std::vector<Interval> pieces;
    for (const auto& p : region_theta_scan(kde, level.b_eps, ts)) {
        const double r = gaussian_level_radius(p.t_min);
        if (r >= 0.0) pieces.push_back({p.theta - r, p.theta + r});
    }
    if (pieces.empty()) return {IntervalSet::empty(), SetStatus::empty_region};
    return {IntervalSet(std::move(pieces)), SetStatus::computed};
}

double ks_distance(std::span<const double> xs_a, std::span<const double> cdf_a, std::span<const double> xs_b,
                   std::span<const double> cdf_b) {
    detail::require(xs_a.size() == cdf_a.size() && xs_b.size() == cdf_b.size(), "ks_distance: size mismatch");
    std::size_t i = 0;
    std::size_t j = 0;
    double fa = 0.0;
    double fb = 0.0;
    double d = 0.0;
    while (i < xs_a.size() || j < xs_b.size()) {
        const double x = std::min(i < xs_a.size() ? xs_a[i] : kInf, j < xs_b.size() ? xs_b[j] : kInf);
        while (i < xs_a.size() && xs_a[i] == x) fa = cdf_a[i++];
        while (j < xs_b.size() && xs_b[j] == x) fb = cdf_b[j++];
        d = std::max(d, std::abs(fa - fb));
    }
    return d;
}

IntervalPrediction cdf_band(const GroupedSample& data, double beta, double gamma) {
    validate_unsup(data, "cdf_band");
    validate_rate(beta, "cdf_band", "beta");
    validate_rate(gamma, "cdf_band", "gamma");
    detail::require(data.size() >= 4, "cdf_band: needs at least 4 groups");

    const std::size_t k1 = data.size() / 2;
    std::vector<std::pair<double, double>> mass;
    for (std::size_t j = 0; j < k1; ++j) {
        const double w = 1.0 / (static_cast<double>(k1) * static_cast<double>(data[j].size()));
        for (double v : data[j]) mass.emplace_back(v, w);
    }
    const StepCdf base = weighted_ecdf(std::move(mass));

    std::vector<double> residuals;
    residuals.reserve(data.size() - k1);
    for (std::size_t j = k1; j < data.size(); ++j) {
        const StepCdf g = group_ecdf(data[j]);
        residuals.push_back(ks_distance(base.xs, base.cdf, g.xs, g.cdf));
    }
    const auto n2 = residuals.size();
    const auto m = static_cast<std::size_t>(std::ceil(static_cast<double>(n2) * (1.0 - gamma) - 1e-9));
    if (m > n2) return {IntervalSet::whole_line(), SetStatus::vacuous_band};
    const double radius = split_conformal_threshold(residuals, gamma);
    if (radius >= 1.0) return {IntervalSet::whole_line(), SetStatus::vacuous_band};

    // a = sup{y : min(F + r, 1) <= beta/2}, b = inf{y : max(F - r, 0) >= 1 - beta/2}.
    // Levels carry a rounding allowance for the summed weights.
    constexpr double kCdfSlack = 1e-12;
    const double q_lo = 0.5 * beta + kCdfSlack;
    const double q_hi = 1.0 - 0.5 * beta - kCdfSlack;
    double a = -kInf;
    if (!(radius > q_lo)) {
        a = kInf;
        for (std::size_t i = 0; i < base.xs.size(); ++i) {
            if (std::min(base.cdf[i] + radius, 1.0) > q_lo) {
                a = base.xs[i];
                break;
            }
        }
    }
    double b = kInf;
    for (std::size_t i = 0; i < base.xs.size(); ++i) {
        if (std::max(base.cdf[i] - radius, 0.0) >= q_hi) {
            b = base.xs[i];
            break;
        }
    }
    return {IntervalSet::single(a, b), SetStatus::computed};
}

LabelPrediction naive_sup(const LabeledGroups& data, double x_star, double alpha, const LogisticFitter& fitter) {
    validate_sup(data, "naive_sup");
    validate_rate(alpha, "naive_sup", "alpha");
    std::vector<LabeledPoint> pooled;
    for (const auto& g : data) pooled.insert(pooled.end(), g.begin(), g.end());
    if (guaranteed_full(pooled.size() + 1, alpha)) return {LabelSet::both(), SetStatus::guaranteed_full};
    const auto set = binary_conformal_set(pooled, x_star, alpha, fitter);
    return {set, set.size() == 0 ? SetStatus::empty_region : SetStatus::computed};
}

LabelPrediction subsample_sup(const LabeledGroups& data, double x_star, double alpha, std::size_t n_subsamples,
                              const LogisticFitter& fitter, Rng& rng) {
    validate_sup(data, "subsample_sup");
    validate_rate(alpha, "subsample_sup", "alpha");
    detail::require(n_subsamples >= 1, "subsample_sup: N must be positive");
    const double level = alpha / static_cast<double>(n_subsamples);
    if (guaranteed_full(data.size() + 1, level)) return {LabelSet::both(), SetStatus::guaranteed_full};

    LabelSet out = LabelSet::both();
    std::vector<LabeledPoint> draw(data.size());
    for (std::size_t s = 0; s < n_subsamples; ++s) {
        for (std::size_t j = 0; j < data.size(); ++j) {
            std::uniform_int_distribution<std::size_t> pick(0, data[j].size() - 1);
            draw[j] = data[j][pick(rng)];
        }
        out = out.intersect(binary_conformal_set(draw, x_star, level, fitter));
    }
    return {out, out.size() == 0 ? SetStatus::empty_region : SetStatus::computed};
}

LabelPrediction randomset_sup(const LabeledGroups& data, double x_star, double delta, double epsilon,
                              RandomSetVariant variant, const LogisticFitter& fitter, Rng& rng,
                              const GridSpec& grid) {
    validate_sup(data, "randomset_sup");
    validate_rate(delta, "randomset_sup", "delta");
    validate_rate(epsilon, "randomset_sup", "epsilon");
    detail::require(std::isfinite(x_star), "randomset_sup: x_star must be finite");
    const std::size_t min_k = variant == RandomSetVariant::kde ? 4 : 2;
    detail::require(data.size() >= min_k, "randomset_sup: too few groups for this variant");
    if (guaranteed_full(data.size() + 1, epsilon)) return {LabelSet::both(), SetStatus::guaranteed_full};

    const auto pairs = sup_pairs(data, delta, fitter, rng);
    LabelSet out;
    bool any_region = false;
    const auto admit = [&](double theta, double t) {
        any_region = true;
        for (int y : {0, 1}) {
            if (logistic_conditional(y, x_star, theta) > t) {
                if (y == 0) out.contains_zero = true;
                else out.contains_one = true;
            }
        }
    };

    if (variant == RandomSetVariant::mean) {
        for (double t : scan_levels(logistic_t_grid(), pairs)) {
            const auto sec = theta_section(pairs, t, epsilon);
            if (!sec.found) continue;
            // p(y | x; theta) is monotone in theta, so the section ends suffice.
            admit(sec.lo, t);
            admit(sec.hi, t);
            if (out == LabelSet::both()) break;
        }
    } else {
        const auto kde = Kde2d::fit(as_points(pairs));
        const auto level = mass_level(kde, epsilon, grid);
        const auto ts = logistic_t_grid();
        for (const auto& p : region_theta_scan(kde, level.b_eps, ts)) {
            admit(p.theta, p.t_min);
            if (out == LabelSet::both()) break;
        }
    }
    if (!any_region) return {LabelSet::none(), SetStatus::empty_region};
    return {out, SetStatus::computed};
}

IntervalPrediction within_group_conformal(const GroupedSample& data, std::size_t group_index, double alpha,
                                          WithinEstimator estimator, double sigma2) {
    validate_unsup(data, "within_group_conformal");
    validate_rate(alpha, "within_group_conformal", "alpha");
    detail::require(group_index < data.size(), "within_group_conformal: group index out of range");
    const auto& target = data[group_index];

    if (estimator == WithinEstimator::group_mean) {
        if (guaranteed_full(target.size() + 1, alpha)) return {IntervalSet::whole_line(), SetStatus::guaranteed_full};
        auto set = conformal_interval_mean(target, alpha);
        const auto status = set.is_empty() ? SetStatus::empty_region : SetStatus::computed;
        return {std::move(set), status};
    }

    const std::size_t k = data.size();
    detail::require(k >= 4, "within_group_conformal: James-Stein needs at least 4 groups");
    detail::require(sigma2 >= 0.0 && std::isfinite(sigma2), "within_group_conformal: sigma2 must be finite and >= 0");
    if (guaranteed_full(target.size() + 1, alpha)) return {IntervalSet::whole_line(), SetStatus::guaranteed_full};

    // Means of the other groups are fixed; only the target mean moves with y.
    std::vector<double> means(k);
    for (std::size_t j = 0; j < k; ++j) {
        means[j] = std::accumulate(data[j].begin(), data[j].end(), 0.0) / static_cast<double>(data[j].size());
    }
    double others_sum = 0.0;
    double others_sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        if (j == group_index) continue;
        others_sum += means[j];
        others_sq += means[j] * means[j];
    }
    const double target_sum = std::accumulate(target.begin(), target.end(), 0.0);
    const double n_aug = static_cast<double>(target.size() + 1);
    const double noise = sigma2 / static_cast<double>(target.size());
    const double kd = static_cast<double>(k);

    const auto shrunk = [&](double y) {
        const double m = (target_sum + y) / n_aug;
        const double grand = (others_sum + m) / kd;
        const double spread = std::max(0.0, others_sq + m * m - kd * grand * grand);
        if (spread == 0.0) return grand;
        const double factor = std::max(0.0, 1.0 - (kd - 3.0) * noise / spread);
        return grand + factor * (m - grand);
    };
    const auto pvalue = [&](double y) {
        const double mu = shrunk(y);
        const double own = std::abs(y - mu);
        std::size_t count = 1;
        for (double v : target) {
            if (std::abs(v - mu) >= own) ++count;
        }
        return PValue{count, target.size() + 1};
    };
    const auto inside = [&](double y) { return pvalue(y).meets(alpha); };

    // Center: the y whose own residual vanishes, y = mu_hat(y).
    const auto [mn, mx] = std::minmax_element(target.begin(), target.end());
    const double scale = (*mx - *mn) + 1.0;
    double lo = means[group_index] - scale;
    double hi = means[group_index] + scale;
    const auto g = [&](double y) { return y - shrunk(y); };
    for (int i = 0; i < 200 && g(lo) > 0.0; ++i) lo -= (hi - lo);
    for (int i = 0; i < 200 && g(hi) < 0.0; ++i) hi += (hi - lo);
    const double center = bisect_root(g, lo, hi);
    if (!inside(center)) return {IntervalSet::empty(), SetStatus::empty_region};

    const BoundarySearch opts{scale / 16.0, 65536.0 * scale, 1e-6};
    return {IntervalSet::single(find_boundary(inside, center, -1, opts), find_boundary(inside, center, +1, opts)),
            SetStatus::computed};
}

} // namespace recp
