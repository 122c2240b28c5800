#include "recp/acceptance.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "recp/conformal.hpp"
#include "recp/methods.hpp"
#include "recp/simlab.hpp"

namespace recp {

namespace {

constexpr std::size_t kReferenceTrials = 500;

std::string fmt(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

// Stated tolerance, widened to 3 Monte-Carlo SEs when fewer trials are run.
double widen(double stated, double p, std::size_t trials) {
    if (trials >= kReferenceTrials) return stated;
    return std::max(stated, 3.0 * monte_carlo_se(p, trials));
}

// Slack for a one-sided bound at probability p; zero at full trial count.
double slack(double p, std::size_t trials) {
    if (trials >= kReferenceTrials) return 0.0;
    return 3.0 * monte_carlo_se(p, trials);
}

RunOptions run_options(const AcceptanceOptions& o, std::uint64_t salt) {
    return {o.trials, stream_seed(o.seed, salt), o.threads};
}

MethodSpec naive_spec(double alpha) {
    MethodSpec m;
    m.kind = MethodKind::naive;
    m.alpha = alpha;
    return m;
}

MethodSpec subsample_spec(double alpha, std::size_t n) {
    MethodSpec m;
    m.kind = MethodKind::subsample;
    m.alpha = alpha;
    m.n_subsamples = n;
    return m;
}

MethodSpec randomset_spec(RandomSetVariant v, double delta, double epsilon) {
    MethodSpec m;
    m.kind = MethodKind::randomset;
    m.variant = v;
    m.alpha = delta + epsilon;
    m.delta = delta;
    m.epsilon = epsilon;
    return m;
}

CriterionResult start(int id, std::string name) {
    CriterionResult r;
    r.id = id;
    r.name = std::move(name);
    return r;
}

bool within(double v, double target, double tol) { return std::abs(v - target) <= tol + 1e-12; }

CriterionResult naive_undercoverage(const AcceptanceOptions& o) {
    auto r = start(1, "naive-undercoverage");
    const auto small = run_experiment(UnsupDesign::balanced(5, 500), "unsup", naive_spec(0.1), run_options(o, 11));
    const auto large = run_experiment(UnsupDesign::balanced(1000, 500), "unsup", naive_spec(0.1), run_options(o, 12));
    const double tol_s = widen(0.05, 0.849, o.trials);
    const double tol_l = widen(0.04, 0.909, o.trials);
    r.pass = within(small.coverage, 0.849, tol_s) && within(large.coverage, 0.909, tol_l);
    r.observed = "k=5: " + fmt(small.coverage) + ", k=1000: " + fmt(large.coverage);
    r.target = "0.849, 0.909";
    r.tolerance = fmt(tol_s) + ", " + fmt(tol_l);
    return r;
}

CriterionResult pathological(const AcceptanceOptions& o) {
    auto r = start(2, "pathological-naive");
    const auto s = run_experiments(pathological_design(SpreadConvention::sd), "pathological",
                                   {naive_spec(0.1), subsample_spec(0.1, 1)}, run_options(o, 21));
    const double bound = 0.10 + slack(0.10, o.trials);
    const double tol = widen(0.04, 0.90, o.trials);
    r.pass = s[0].coverage <= bound && within(s[1].coverage, 0.90, tol);
    r.observed = "naive " + fmt(s[0].coverage) + ", subsample " + fmt(s[1].coverage) + " (sd convention)";
    r.target = "naive <= 0.10, subsample 0.90";
    r.tolerance = "naive bound " + fmt(bound) + ", subsample " + fmt(tol);
    return r;
}

CriterionResult subsample_validity(const AcceptanceOptions& o) {
    auto r = start(3, "subsample-validity");
    const std::size_t k = 1000;
    const auto s = run_experiments(UnsupDesign::balanced(k, 500), "unsup",
                                   {subsample_spec(0.1, 1), subsample_spec(0.1, 2), subsample_spec(0.1, 4)},
                                   run_options(o, 31));
    const double lo1 = 0.87 - slack(0.9, o.trials);
    const double hi1 = 0.93 + slack(0.9, o.trials);
    bool ok = s[0].coverage >= lo1 && s[0].coverage <= hi1;
    std::string obs = "N=1: " + fmt(s[0].coverage);
    std::string tol = "N=1 in [" + fmt(lo1) + ", " + fmt(hi1) + "]";
    for (std::size_t i = 1; i < 3; ++i) {
        const double n = static_cast<double>(s[i].N);
        const double bound = 1.0 - 0.1 / n + 1.0 / static_cast<double>(k + 1);
        const double upper = bound + 3.0 * std::max(s[i].coverage_se, monte_carlo_se(bound, s[i].n_trials));
        const double lower = 0.9 - slack(0.9, o.trials);
        ok = ok && s[i].coverage >= lower && s[i].coverage <= upper;
        obs += ", N=" + std::to_string(s[i].N) + ": " + fmt(s[i].coverage);
        tol += ", N=" + std::to_string(s[i].N) + " in [" + fmt(lower) + ", " + fmt(upper) + "]";
    }
    r.pass = ok;
    r.observed = obs;
    r.target = "N=1 ~0.90; N>1 between 1-alpha and the Frechet bound";
    r.tolerance = tol;
    return r;
}

CriterionResult full_coverage_cells(const AcceptanceOptions& o) {
    auto r = start(4, "guaranteed-full");
    const std::vector<std::size_t> ks{5, 10, 15, 20, 25, 50, 100, 250, 500, 1000};
    const std::vector<std::size_t> ns{1, 2, 4, 6, 8, 10};
    std::size_t cells = 0;
    std::size_t bad = 0;
    std::uint64_t salt = 400;
    for (double alpha : {0.1, 0.05, 0.025}) {
        for (std::size_t k : ks) {
            for (std::size_t n : ns) {
                ++salt;
                if (!guaranteed_full(k + 1, alpha / static_cast<double>(n))) continue;
                ++cells;
                const auto s = run_experiment(UnsupDesign::balanced(k, 500), "unsup", subsample_spec(alpha, n),
                                              run_options(o, salt));
                if (!s.full_coverage_flag || s.coverage != 1.0) ++bad;
            }
        }
    }
    r.pass = cells > 0 && bad == 0;
    r.observed = std::to_string(cells - bad) + "/" + std::to_string(cells) + " cells flagged with coverage 1";
    r.target = "all cells with 1/(k+1) >= alpha/N";
    r.tolerance = "0";
    return r;
}

CriterionResult randomset_conservative(const AcceptanceOptions& o) {
    auto r = start(5, "randomset-conservative");
    const auto spec_mean = randomset_spec(RandomSetVariant::mean, 0.05, 0.05);
    const auto m50 = run_experiment(UnsupDesign::balanced(50, 500), "unsup", spec_mean, run_options(o, 51));
    const auto m100 = run_experiment(UnsupDesign::balanced(100, 500), "unsup", spec_mean, run_options(o, 52));
    const auto kde = run_experiment(UnsupDesign::balanced(20, 500), "unsup",
                                    randomset_spec(RandomSetVariant::kde, 0.05, 0.05), run_options(o, 53));
    const double b_mean = 0.99 - slack(0.99, o.trials);
    const double b_kde = 0.97 - slack(0.97, o.trials);
    r.pass = m50.coverage >= b_mean && m100.coverage >= b_mean && kde.coverage >= b_kde;
    r.observed = "mean k=50: " + fmt(m50.coverage) + ", mean k=100: " + fmt(m100.coverage) +
                 ", kde k=20: " + fmt(kde.coverage);
    r.target = "mean >= 0.99, kde >= 0.97";
    r.tolerance = "bounds " + fmt(b_mean) + ", " + fmt(b_kde);
    return r;
}

std::vector<ExperimentSummary> supervised_mu1(const AcceptanceOptions& o) {
    SupDesign d{1000, 500, 1.0, 0.1};
    return run_experiments(d, "sup-mu1", {naive_spec(0.1), randomset_spec(RandomSetVariant::kde, 0.05, 0.05)},
                           run_options(o, 67));
}

CriterionResult sup_naive(const AcceptanceOptions& o, const std::vector<ExperimentSummary>& s) {
    auto r = start(6, "sup-naive");
    const double correct = s[0].coverage;
    const double incorrect = s[0].incorrect_coverage.value_or(-1.0);
    const double tol_c = widen(0.05, 0.910, o.trials);
    const double tol_i = widen(0.07, 0.625, o.trials);
    r.pass = within(correct, 0.910, tol_c) && within(incorrect, 0.625, tol_i);
    r.observed = "correct " + fmt(correct) + ", incorrect " + fmt(incorrect);
    r.target = "0.910, 0.625";
    r.tolerance = fmt(tol_c) + ", " + fmt(tol_i);
    return r;
}

CriterionResult sup_kde(const AcceptanceOptions& o, const std::vector<ExperimentSummary>& s) {
    auto r = start(7, "sup-kde");
    const double correct = s[1].coverage;
    const double incorrect = s[1].incorrect_coverage.value_or(2.0);
    const double lo = 0.95 - slack(0.95, o.trials);
    const double hi = 0.95 + slack(0.95, o.trials);
    r.pass = correct >= lo && incorrect <= hi;
    r.observed = "correct " + fmt(correct) + ", incorrect " + fmt(incorrect);
    r.target = "correct >= 0.95, incorrect <= 0.95";
    r.tolerance = "bounds " + fmt(lo) + ", " + fmt(hi);
    return r;
}

CriterionResult shrinkage_size(const AcceptanceOptions& o) {
    auto r = start(8, "shrinkage-size");
    const auto rows = shrinkage_experiment(2, {100, 500}, 0.1, run_options(o, 81));
    const double bound = 0.87 - slack(0.9, o.trials);
    bool ok = true;
    std::string obs;
    for (const auto& row : rows) {
        ok = ok && row.james_stein.mean_size < row.group_mean.mean_size && row.james_stein.coverage >= bound &&
             row.group_mean.coverage >= bound && row.james_stein.data_digest == row.group_mean.data_digest;
        if (!obs.empty()) obs += "; ";
        obs += "k=" + std::to_string(row.k) + ": size js " + fmt(row.james_stein.mean_size, 2) + " vs mean " +
               fmt(row.group_mean.mean_size, 2) + ", coverage " + fmt(row.james_stein.coverage) + "/" +
               fmt(row.group_mean.coverage);
    }
    r.pass = ok;
    r.observed = obs;
    r.target = "js size < mean size; coverages >= 0.87";
    r.tolerance = "coverage bound " + fmt(bound);
    return r;
}

// Outermost grid point of {pi >= alpha} on one side of the mean, refined by
// a second grid inside the last bracket.
double brute_endpoint(const std::vector<double>& sample, double alpha, double center, double reach, int dir) {
    constexpr int kPoints = 400;
    const auto ok = [&](double y) { return conformal_pvalue_mean(sample, y).meets(alpha); };
    double in = center;
    double step = reach / kPoints;
    for (int pass = 0; pass < 3; ++pass) {
        double out = in + dir * step * kPoints;
        for (int i = 1; i <= kPoints; ++i) {
            const double y = in + dir * step * i;
            if (!ok(y)) {
                out = y;
                break;
            }
        }
        if (ok(out)) return out;
        in = out - dir * step;
        step /= kPoints;
    }
    return in;
}

CriterionResult pvalue_unimodal(const AcceptanceOptions& o) {
    auto r = start(9, "pvalue-unimodal");
    Rng rng = make_stream(o.seed, 91);
    std::uniform_int_distribution<int> size(1, 50);
    std::normal_distribution<double> z(0.0, 1.0);
    std::size_t unimodal_fail = 0;
    std::size_t endpoint_fail = 0;
    double worst = 0.0;
    const double alpha = 0.1;
    for (int s = 0; s < 200; ++s) {
        std::vector<double> sample(static_cast<std::size_t>(size(rng)));
        const double scale = std::exp(z(rng));
        for (auto& v : sample) v = scale * z(rng);
        const auto [mn, mx] = std::minmax_element(sample.begin(), sample.end());
        double mean = 0.0;
        for (double v : sample) mean += v;
        mean /= static_cast<double>(sample.size());
        const double reach = 3.0 * (*mx - *mn) + 3.0;

        bool ok = conformal_pvalue_mean(sample, mean).value() == 1.0;
        double prev = 2.0;
        for (int i = 0; i < 400 && ok; ++i) {
            const double y = mean + reach * i / 399.0;
            const double p = conformal_pvalue_mean(sample, y).value();
            ok = p <= prev;
            prev = p;
        }
        prev = 2.0;
        for (int i = 0; i < 400 && ok; ++i) {
            const double y = mean - reach * i / 399.0;
            const double p = conformal_pvalue_mean(sample, y).value();
            ok = p <= prev;
            prev = p;
        }
        if (!ok) ++unimodal_fail;

        const auto set = conformal_interval_mean(sample, alpha);
        if (set.is_whole_line()) {
            const bool brute_full = conformal_pvalue_mean(sample, mean + 1e6).meets(alpha);
            if (!brute_full) ++endpoint_fail;
            continue;
        }
        const auto iv = set.hull();
        const double lo = brute_endpoint(sample, alpha, mean, reach, -1);
        const double hi = brute_endpoint(sample, alpha, mean, reach, +1);
        const double err = std::max(std::abs(iv.lo - lo), std::abs(iv.hi - hi));
        worst = std::max(worst, err);
        if (!(err <= 1e-3)) ++endpoint_fail;
    }
    r.pass = unimodal_fail == 0 && endpoint_fail == 0;
    r.observed = std::to_string(unimodal_fail) + " non-unimodal, " + std::to_string(endpoint_fail) +
                 " endpoint mismatches, max error " + fmt(worst, 6);
    r.target = "200 samples unimodal, endpoints agree";
    r.tolerance = "1e-3";
    return r;
}

CriterionResult levelset_calibration(const AcceptanceOptions& o) {
    auto r = start(10, "levelset-calibration");
    const boost::math::students_t t5(5.0);
    const std::size_t reps = std::max<std::size_t>(50, o.trials / 2);
    std::vector<double> mass;
    std::uint64_t salt = 100;
    for (std::size_t n : {50, 500, 5000}) {
        Rng rng = make_stream(o.seed, ++salt);
        std::student_t_distribution<double> draw(5.0);
        double total = 0.0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            std::vector<double> sample(n);
            for (auto& v : sample) v = draw(rng);
            const auto pair = split_level_set(sample, 0.1, rng);
            const double rad = gaussian_level_radius(pair.t);
            if (rad < 0.0) continue;
            total += boost::math::cdf(t5, pair.theta_hat + rad) - boost::math::cdf(t5, pair.theta_hat - rad);
        }
        mass.push_back(total / static_cast<double>(reps));
    }
    const double tol = 0.03;
    const bool trend = std::abs(mass[2] - 0.9) <= std::abs(mass[0] - 0.9) + tol;
    r.pass = trend && within(mass[2], 0.9, tol);
    r.observed = "n=50: " + fmt(mass[0]) + ", n=500: " + fmt(mass[1]) + ", n=5000: " + fmt(mass[2]);
    r.target = "0.9 at n=5000, trending toward 0.9";
    r.tolerance = fmt(tol);
    return r;
}

CriterionResult cdf_band_coverage(const AcceptanceOptions& o) {
    auto r = start(11, "cdf-band");
    std::vector<char> hit(o.trials);
    std::vector<char> unbounded(o.trials);
    for (std::size_t trial = 0; trial < o.trials; ++trial) {
        Rng rng = make_stream(stream_seed(o.seed, 111), trial);
        std::normal_distribution<double> z(0.0, 1.0);
        GroupedSample groups(100, std::vector<double>(500));
        for (auto& g : groups) {
            for (auto& v : g) v = z(rng);
        }
        const double y = z(rng);
        const auto p = cdf_band(groups, 0.05, 0.05);
        hit[trial] = p.set.contains(y);
        unbounded[trial] = !p.set.is_bounded();
    }
    const auto n = static_cast<double>(o.trials);
    const double coverage = static_cast<double>(std::count(hit.begin(), hit.end(), 1)) / n;
    const double share = static_cast<double>(std::count(unbounded.begin(), unbounded.end(), 1)) / n;
    const double bound = 0.85 - slack(0.9, o.trials);
    r.pass = coverage >= bound;
    r.observed = fmt(coverage) + " (unbounded share " + fmt(share) + ")";
    r.target = ">= 0.85";
    r.tolerance = "bound " + fmt(bound);
    return r;
}

CriterionResult iid_conformal(const AcceptanceOptions& o) {
    auto r = start(12, "iid-conformal");
    const std::size_t reps = std::max<std::size_t>(o.trials * 4, 200);
    std::size_t hit = 0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
        Rng rng = make_stream(stream_seed(o.seed, 121), rep);
        std::normal_distribution<double> z(0.0, 1.0);
        std::vector<double> sample(20);
        for (auto& v : sample) v = z(rng);
        const double y = z(rng);
        if (conformal_interval_mean(sample, 0.1).contains(y)) ++hit;
    }
    const double coverage = static_cast<double>(hit) / static_cast<double>(reps);
    const double s = reps >= 2000 ? 0.0 : 3.0 * monte_carlo_se(0.91, reps);
    r.pass = coverage >= 0.88 - s && coverage <= 0.95 + s;
    r.observed = fmt(coverage) + " over " + std::to_string(reps) + " reps";
    r.target = "[0.88, 0.95]";
    r.tolerance = "interval " + fmt(0.88 - s) + " to " + fmt(0.95 + s);
    return r;
}

std::vector<Criterion> build() {
    // Criteria 6 and 7 share one supervised run.
    struct Shared {
        std::vector<ExperimentSummary> sup;
        AcceptanceOptions key{};
        bool ready = false;
    };
    static Shared shared;
    const auto sup = [](const AcceptanceOptions& o) -> const std::vector<ExperimentSummary>& {
        if (!shared.ready || shared.key.seed != o.seed || shared.key.trials != o.trials) {
            shared.sup = supervised_mu1(o);
            shared.key = o;
            shared.ready = true;
        }
        return shared.sup;
    };
    return {
        {1, "naive-undercoverage", naive_undercoverage},
        {2, "pathological-naive", pathological},
        {3, "subsample-validity", subsample_validity},
        {4, "guaranteed-full", full_coverage_cells},
        {5, "randomset-conservative", randomset_conservative},
        {6, "sup-naive", [sup](const AcceptanceOptions& o) { return sup_naive(o, sup(o)); }},
        {7, "sup-kde", [sup](const AcceptanceOptions& o) { return sup_kde(o, sup(o)); }},
        {8, "shrinkage-size", shrinkage_size},
        {9, "pvalue-unimodal", pvalue_unimodal},
        {10, "levelset-calibration", levelset_calibration},
        {11, "cdf-band", cdf_band_coverage},
        {12, "iid-conformal", iid_conformal},
    };
}

} // namespace

const std::vector<Criterion>& acceptance_criteria() {
    static const std::vector<Criterion> all = build();
    return all;
}

std::vector<const Criterion*> select_criteria(const std::string& filter) {
    std::vector<const Criterion*> out;
    for (const auto& c : acceptance_criteria()) {
        if (filter.empty() || filter == c.name || filter == std::to_string(c.id)) out.push_back(&c);
    }
    return out;
}

std::string format_result(const CriterionResult& r) {
    std::ostringstream os;
    os << (r.pass ? "PASS" : "FAIL") << "  " << r.id << " " << r.name << "  observed: " << r.observed
       << "  target: " << r.target << "  tolerance: " << r.tolerance;
    return os.str();
}

} // namespace recp
