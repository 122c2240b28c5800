#include "run_config.hpp"

#include <cmath>

namespace recp::cli {

namespace {

void fail(const std::string& field, const std::string& what) { throw ConfigError{field + ": " + what}; }

void check_rate(const char* field, double v) {
    if (!(v > 0.0 && v < 1.0)) fail(field, "must lie in (0, 1), got " + std::to_string(v));
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
    for (const char* o : options)
        if (v == o) return true;
    return false;
}

void check_grid(const char* field, const std::vector<std::size_t>& grid, std::size_t min) {
    for (std::size_t v : grid)
        if (v < min) fail(field, "entries must be at least " + std::to_string(min));
}

} // namespace

void validate(const RunConfig& c) {
    if (!one_of(c.design, {"unsup", "sup", "pathological"})) fail("design", "expected unsup, sup or pathological");
    if (!one_of(c.method, {"naive", "subsample", "randomset", "cdf_band"}))
        fail("method", "expected naive, subsample, randomset or cdf_band");
    if (!one_of(c.variant, {"mean", "kde"})) fail("variant", "expected mean or kde");
    if (!one_of(c.convention, {"sd", "variance"})) fail("convention", "expected sd or variance");
    if (!one_of(c.fitter, {"map", "mle"})) fail("fitter", "expected map or mle");
    check_rate("alpha", c.alpha);
    check_rate("delta", c.delta);
    check_rate("epsilon", c.epsilon);
    const bool split = c.method == "randomset" || c.method == "cdf_band";
    if (split) {
        if (c.alpha_set && c.delta_set && c.epsilon_set && std::abs(c.delta + c.epsilon - c.alpha) > 1e-12)
            fail("alpha", "must equal delta + epsilon for " + c.method);
        const MethodSpec m = method_spec(c, 1);
        check_rate("delta", m.delta);
        check_rate("epsilon", m.epsilon);
        if (m.alpha >= 1.0) fail("alpha", "delta + epsilon must be below 1");
    }
    if (c.method == "cdf_band" && c.design == "sup") fail("method", "cdf_band needs an unsupervised design");
    check_grid("k", c.k_grid, 1);
    check_grid("n", c.n_grid, 1);
    check_grid("N", c.N_grid, 1);
    if (!(c.tau >= 0.0) || !std::isfinite(c.tau)) fail("tau", "must be finite and non-negative");
    if (!(c.sigma > 0.0) || !std::isfinite(c.sigma)) fail("sigma", "must be finite and positive");
    if (!std::isfinite(c.mu)) fail("mu", "must be finite");
    if (c.trials && *c.trials == 0) fail("trials", "must be positive");
    if (c.threads == 0) fail("threads", "must be positive");
}

MethodSpec method_spec(const RunConfig& c, std::size_t n_subsamples) {
    MethodSpec m;
    if (c.method == "naive") m.kind = MethodKind::naive;
    else if (c.method == "subsample") m.kind = MethodKind::subsample;
    else if (c.method == "randomset") m.kind = MethodKind::randomset;
    else m.kind = MethodKind::cdf_band;
    m.variant = c.variant == "kde" ? RandomSetVariant::kde : RandomSetVariant::mean;
    m.n_subsamples = n_subsamples;
    m.map_prior = c.fitter == "map";
    m.alpha = c.alpha;
    m.delta = c.delta;
    m.epsilon = c.epsilon;
    if (m.kind == MethodKind::randomset || m.kind == MethodKind::cdf_band) {
        if (c.alpha_set && !c.delta_set && !c.epsilon_set) {
            m.delta = m.epsilon = c.alpha / 2.0;
        } else if (c.delta_set && !c.epsilon_set && !c.alpha_set) {
            m.epsilon = c.delta;
        } else if (c.epsilon_set && !c.delta_set && !c.alpha_set) {
            m.delta = c.epsilon;
        } else if (c.alpha_set && c.delta_set != c.epsilon_set) {
            if (c.delta_set) m.epsilon = c.alpha - c.delta;
            else m.delta = c.alpha - c.epsilon;
        }
        m.alpha = m.delta + m.epsilon;
    }
    return m;
}

} // namespace recp::cli
