#include "recp/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <random>
#include <thread>

#include "recp/error.hpp"

namespace recp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// FNV-1a over raw bytes.
class Digest {
public:
    void add(const void* data, std::size_t len) noexcept {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h_ ^= p[i];
            h_ *= 0x100000001b3ULL;
        }
    }
    void add(double v) noexcept { add(&v, sizeof v); }
    void add(int v) noexcept { add(&v, sizeof v); }
    void add(std::uint64_t v) noexcept { add(&v, sizeof v); }
    [[nodiscard]] std::uint64_t value() const noexcept { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

std::uint64_t digest_of(const UnsupDraw& d) {
    Digest h;
    for (const auto& g : d.groups) {
        h.add(g.data(), g.size() * sizeof(double));
        h.add(-0.0);
    }
    h.add(d.theta_new);
    h.add(d.y_new);
    return h.value();
}

std::uint64_t digest_of(const SupDraw& d) {
    Digest h;
    for (const auto& g : d.groups) {
        for (const auto& p : g) {
            h.add(p.x);
            h.add(p.y);
        }
        h.add(-0.0);
    }
    h.add(d.x_star);
    h.add(d.y_star);
    return h.value();
}

std::uint64_t fold(std::uint64_t acc, std::uint64_t trial_digest) noexcept {
    return splitmix64(acc ^ trial_digest);
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next.store(n);
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

LogisticFitter fitter_for(const MethodSpec& m) {
    return m.map_prior ? LogisticFitter::map(m.prior) : LogisticFitter::mle();
}

Rng method_stream(std::uint64_t seed, std::size_t trial, std::size_t method_index) {
    return Rng(stream_seed(stream_seed(seed, trial), method_index + 1));
}

TrialResult evaluate(const UnsupDraw& d, const MethodSpec& m, Rng& rng) {
    TrialResult r;
    try {
        IntervalPrediction p;
        switch (m.kind) {
        case MethodKind::naive: p = naive_unsup(d.groups, m.alpha); break;
        case MethodKind::subsample: p = subsample_unsup(d.groups, m.alpha, m.n_subsamples, rng); break;
        case MethodKind::randomset:
            p = m.variant == RandomSetVariant::mean ? randomset_mean_unsup(d.groups, m.delta, m.epsilon, rng)
                                                    : randomset_kde_unsup(d.groups, m.delta, m.epsilon, rng);
            break;
        case MethodKind::cdf_band: p = cdf_band(d.groups, m.delta, m.epsilon); break;
        }
        r.covered = p.set.contains(d.y_new);
        r.set_size = p.set.size();
        r.guaranteed_full = p.status == SetStatus::guaranteed_full;
    } catch (const FitError&) {
        r.failed = true;
    } catch (const DegenerateError&) {
        r.failed = true;
    }
    return r;
}

TrialResult evaluate(const SupDraw& d, const MethodSpec& m, Rng& rng) {
    TrialResult r;
    try {
        const auto fitter = fitter_for(m);
        LabelPrediction p;
        switch (m.kind) {
        case MethodKind::naive: p = naive_sup(d.groups, d.x_star, m.alpha, fitter); break;
        case MethodKind::subsample:
            p = subsample_sup(d.groups, d.x_star, m.alpha, m.n_subsamples, fitter, rng);
            break;
        case MethodKind::randomset:
            p = randomset_sup(d.groups, d.x_star, m.delta, m.epsilon, m.variant, fitter, rng);
            break;
        case MethodKind::cdf_band: throw PreconditionError("cdf_band applies to unsupervised designs only");
        }
        r.covered = p.set.contains(d.y_star);
        r.incorrect_covered = p.set.contains(1 - d.y_star);
        r.set_size = static_cast<double>(p.set.size());
        r.guaranteed_full = p.status == SetStatus::guaranteed_full;
    } catch (const FitError&) {
        r.failed = true;
        r.incorrect_covered = false;
    } catch (const DegenerateError&) {
        r.failed = true;
        r.incorrect_covered = false;
    }
    return r;
}

ExperimentSummary summarize(const std::vector<TrialResult>& trials, ExperimentSummary s) {
    s.n_trials = trials.size();
    std::size_t covered = 0;
    std::size_t incorrect = 0;
    bool has_incorrect = false;
    std::size_t full = 0;
    std::size_t finite = 0;
    double size_sum = 0.0;
    for (const auto& t : trials) {
        if (t.covered) ++covered;
        if (t.incorrect_covered) {
            has_incorrect = true;
            if (*t.incorrect_covered) ++incorrect;
        }
        if (t.guaranteed_full) ++full;
        if (t.failed) {
            ++s.failures;
            continue;
        }
        if (std::isfinite(t.set_size)) {
            size_sum += t.set_size;
            ++finite;
        } else {
            ++s.unbounded;
        }
    }
    const auto n = static_cast<double>(trials.size());
    s.coverage = trials.empty() ? 0.0 : static_cast<double>(covered) / n;
    s.coverage_se = monte_carlo_se(s.coverage, trials.size());
    if (has_incorrect) s.incorrect_coverage = static_cast<double>(incorrect) / n;
    s.mean_size = finite == 0 ? kInf : size_sum / static_cast<double>(finite);
    s.full_coverage_flag = !trials.empty() && full == trials.size();
    return s;
}

ExperimentSummary header(const Design& design, const std::string& id, const MethodSpec& m, std::uint64_t seed) {
    ExperimentSummary s;
    s.design = id;
    s.method = to_string(m.kind);
    s.variant = m.kind == MethodKind::randomset ? to_string(m.variant) : "";
    if (const auto* u = std::get_if<UnsupDesign>(&design)) {
        s.k = u->k();
        s.n_per_group = u->group_sizes.empty() ? 0 : u->group_sizes.back();
    } else {
        const auto& sd = std::get<SupDesign>(design);
        s.k = sd.k;
        s.n_per_group = sd.n;
    }
    s.alpha = m.alpha;
    s.delta = m.delta;
    s.epsilon = m.epsilon;
    s.N = m.n_subsamples;
    s.seed = seed;
    return s;
}

void validate_method(const MethodSpec& m, bool supervised) {
    const auto rate = [](double v, const char* name) {
        detail::require(v > 0.0 && v < 1.0, std::string(name) + " must lie in (0,1)");
    };
    rate(m.alpha, "alpha");
    rate(m.delta, "delta");
    rate(m.epsilon, "epsilon");
    detail::require(m.n_subsamples >= 1, "N must be positive");
    detail::require(!(supervised && m.kind == MethodKind::cdf_band), "cdf_band applies to unsupervised designs only");
}

} // namespace

UnsupDesign UnsupDesign::balanced(std::size_t k, std::size_t n, double mu, double tau, double sigma) {
    return {std::vector<std::size_t>(k, n), mu, tau, sigma};
}

void UnsupDesign::validate() const {
    detail::require(!group_sizes.empty(), "design: k must be positive");
    for (auto n : group_sizes) detail::require(n >= 1, "design: every group needs at least one observation");
    detail::require(tau > 0.0 && std::isfinite(tau), "design: tau must be positive");
    detail::require(sigma > 0.0 && std::isfinite(sigma), "design: sigma must be positive");
    detail::require(std::isfinite(mu), "design: mu must be finite");
}

void SupDesign::validate() const {
    detail::require(k >= 1, "design: k must be positive");
    detail::require(n >= 1, "design: n must be positive");
    detail::require(tau > 0.0 && std::isfinite(tau), "design: tau must be positive");
    detail::require(std::isfinite(mu), "design: mu must be finite");
}

UnsupDesign pathological_design(SpreadConvention convention) {
    UnsupDesign d;
    d.group_sizes.assign(20, 5);
    d.group_sizes.front() = 1000;
    d.mu = 0.0;
    d.tau = convention == SpreadConvention::sd ? 10.0 : std::sqrt(10.0);
    d.sigma = convention == SpreadConvention::sd ? 0.1 : std::sqrt(0.1);
    return d;
}

UnsupDraw gen_unsup(const UnsupDesign& design, Rng& rng) {
    design.validate();
    std::normal_distribution<double> z(0.0, 1.0);
    UnsupDraw d;
    d.groups.resize(design.k());
    d.thetas.resize(design.k());
    for (std::size_t j = 0; j < design.k(); ++j) {
        const double theta = design.mu + design.tau * z(rng);
        d.thetas[j] = theta;
        auto& g = d.groups[j];
        g.resize(design.group_sizes[j]);
        for (auto& v : g) v = theta + design.sigma * z(rng);
    }
    d.theta_new = design.mu + design.tau * z(rng);
    d.y_new = d.theta_new + design.sigma * z(rng);
    return d;
}

SupDraw gen_sup(const SupDesign& design, Rng& rng) {
    design.validate();
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SupDraw d;
    d.groups.resize(design.k);
    for (auto& g : d.groups) {
        const double theta = design.mu + design.tau * z(rng);
        g.resize(design.n);
        for (auto& p : g) {
            p.x = z(rng);
            p.y = u(rng) < logistic(theta * p.x) ? 1 : 0;
        }
    }
    d.x_star = z(rng);
    d.theta_star = design.mu + design.tau * z(rng);
    d.y_star = u(rng) < logistic(d.theta_star * d.x_star) ? 1 : 0;
    return d;
}

const char* to_string(MethodKind kind) noexcept {
    switch (kind) {
    case MethodKind::naive: return "naive";
    case MethodKind::subsample: return "subsample";
    case MethodKind::randomset: return "randomset";
    case MethodKind::cdf_band: return "cdf_band";
    }
    return "unknown";
}

const char* to_string(RandomSetVariant variant) noexcept {
    return variant == RandomSetVariant::mean ? "mean" : "kde";
}

double monte_carlo_se(double p, std::size_t n) noexcept {
    if (n == 0) return 0.0;
    return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

std::vector<ExperimentSummary> run_experiments(const Design& design, const std::string& design_id,
                                               const std::vector<MethodSpec>& methods, const RunOptions& options) {
    detail::require(options.n_trials >= 1, "trials must be positive");
    detail::require(!methods.empty(), "no methods given");
    const bool supervised = std::holds_alternative<SupDesign>(design);
    std::visit([](const auto& d) { d.validate(); }, design);
    for (const auto& m : methods) validate_method(m, supervised);

    std::vector<std::vector<TrialResult>> results(methods.size(), std::vector<TrialResult>(options.n_trials));
    std::vector<std::uint64_t> digests(options.n_trials);
    parallel_for(options.n_trials, options.threads, [&](std::size_t trial) {
        Rng rng = make_stream(options.seed, trial);
        std::visit(
            [&](const auto& d) {
                const auto draw = [&] {
                    if constexpr (std::is_same_v<std::decay_t<decltype(d)>, UnsupDesign>) return gen_unsup(d, rng);
                    else return gen_sup(d, rng);
                }();
                digests[trial] = digest_of(draw);
                for (std::size_t m = 0; m < methods.size(); ++m) {
                    Rng mrng = method_stream(options.seed, trial, m);
                    results[m][trial] = evaluate(draw, methods[m], mrng);
                }
            },
            design);
    });

    std::uint64_t digest = 0;
    for (auto d : digests) digest = fold(digest, d);
    std::vector<ExperimentSummary> out;
    out.reserve(methods.size());
    for (std::size_t m = 0; m < methods.size(); ++m) {
        auto s = summarize(results[m], header(design, design_id, methods[m], options.seed));
        s.data_digest = digest;
        out.push_back(std::move(s));
    }
    return out;
}

ExperimentSummary run_experiment(const Design& design, const std::string& design_id, const MethodSpec& method,
                                 const RunOptions& options) {
    return run_experiments(design, design_id, {method}, options).front();
}

TrialResult run_trial(const Design& design, const MethodSpec& method, std::uint64_t seed, std::size_t trial) {
    validate_method(method, std::holds_alternative<SupDesign>(design));
    Rng rng = make_stream(seed, trial);
    Rng mrng = method_stream(seed, trial, 0);
    if (const auto* u = std::get_if<UnsupDesign>(&design)) return evaluate(gen_unsup(*u, rng), method, mrng);
    return evaluate(gen_sup(std::get<SupDesign>(design), rng), method, mrng);
}

std::vector<ShrinkageRow> shrinkage_experiment(int setup, const std::vector<std::size_t>& k_grid, double alpha,
                                               const RunOptions& options) {
    detail::require(setup == 1 || setup == 2, "shrinkage setup must be 1 or 2");
    detail::require(!k_grid.empty(), "k grid is empty");
    detail::require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
    detail::require(options.n_trials >= 1, "trials must be positive");
    const double sigma2 = setup == 1 ? 1.0 : 100.0;
    const std::string id = "shrinkage-" + std::to_string(setup);

    std::vector<ShrinkageRow> rows;
    for (std::size_t k : k_grid) {
        detail::require(k >= 4, "shrinkage: k must be at least 4");
        const auto design = UnsupDesign::balanced(k, 10, 0.0, 1.0, std::sqrt(sigma2));
        std::vector<TrialResult> mean_res(options.n_trials);
        std::vector<TrialResult> js_res(options.n_trials);
        std::vector<std::uint64_t> digests(options.n_trials);
        parallel_for(options.n_trials, options.threads, [&](std::size_t trial) {
            Rng rng = make_stream(options.seed, trial);
            const auto draw = gen_unsup(design, rng);
            std::normal_distribution<double> z(0.0, 1.0);
            const double y_new = draw.thetas.front() + std::sqrt(sigma2) * z(rng);
            Digest h;
            h.add(digest_of(draw));
            h.add(y_new);
            digests[trial] = h.value();
            const auto run = [&](WithinEstimator e) {
                TrialResult r;
                const auto p = within_group_conformal(draw.groups, 0, alpha, e, sigma2);
                r.covered = p.set.contains(y_new);
                r.set_size = p.set.size();
                r.guaranteed_full = p.status == SetStatus::guaranteed_full;
                return r;
            };
            mean_res[trial] = run(WithinEstimator::group_mean);
            js_res[trial] = run(WithinEstimator::james_stein);
        });
        std::uint64_t digest = 0;
        for (auto d : digests) digest = fold(digest, d);

        ExperimentSummary base;
        base.design = id;
        base.k = k;
        base.n_per_group = 10;
        base.alpha = alpha;
        base.seed = options.seed;
        base.data_digest = digest;
        ShrinkageRow row;
        row.k = k;
        base.method = "within_mean";
        row.group_mean = summarize(mean_res, base);
        base.method = "within_js";
        row.james_stein = summarize(js_res, base);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace recp
