#include "app.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <ostream>

#include "output.hpp"
#include "recp/acceptance.hpp"
#include "recp/error.hpp"
#include "run_config.hpp"
#include "tables.hpp"

namespace recp::cli {

namespace {

struct IoError {
    std::string message;
};

std::string design_label(const RunConfig& c) {
    if (c.design == "pathological") return "pathological/" + c.convention;
    if (c.design == "sup") return "sup/mu=" + format_double(c.mu) + "/tau=" + format_double(c.tau);
    return "unsup/mu=" + format_double(c.mu) + "/tau=" + format_double(c.tau) + "/sigma=" + format_double(c.sigma);
}

SpreadConvention convention(const RunConfig& c) {
    return c.convention == "variance" ? SpreadConvention::variance : SpreadConvention::sd;
}

void log_design(std::ostream& err, const std::string& label, std::size_t k, std::size_t n, std::size_t methods,
                std::size_t trials) {
    err << "design " << label << " k=" << k << " n=" << n << ": " << methods << " method(s), " << trials
        << " trials" << std::endl;
}

RunOptions options(const RunConfig& c) { return {c.trials.value_or(500), *c.seed, c.threads}; }

std::vector<ExperimentSummary> simulate(const RunConfig& c, std::ostream& err) {
    if (c.design != "pathological" && c.k_grid.empty()) throw ConfigError{"k: at least one value is required"};
    const std::vector<std::size_t> n_grid = c.n_grid.empty() ? std::vector<std::size_t>{500} : c.n_grid;
    const std::vector<std::size_t> N_grid = c.N_grid.empty() ? std::vector<std::size_t>{1} : c.N_grid;
    if (c.method != "subsample" && (N_grid.size() != 1 || N_grid.front() != 1))
        throw ConfigError{"N: only the subsample method takes N > 1"};

    std::vector<MethodSpec> methods;
    for (std::size_t N : N_grid) methods.push_back(method_spec(c, N));
    const RunOptions opts = options(c);
    const std::string label = design_label(c);

    std::vector<ExperimentSummary> rows;
    const auto append = [&](const Design& d, std::size_t k, std::size_t n) {
        log_design(err, label, k, n, methods.size(), opts.n_trials);
        auto r = run_experiments(d, label, methods, opts);
        rows.insert(rows.end(), r.begin(), r.end());
    };
    if (c.design == "pathological") {
        append(pathological_design(convention(c)), 20, 5);
        return rows;
    }
    for (std::size_t k : c.k_grid) {
        for (std::size_t n : n_grid) {
            if (c.design == "sup") append(SupDesign{k, n, c.mu, c.tau}, k, n);
            else append(UnsupDesign::balanced(k, n, c.mu, c.tau, c.sigma), k, n);
        }
    }
    return rows;
}

std::vector<ExperimentSummary> reproduce(const RunConfig& c, std::ostream& err) {
    const auto plans = resolve_table(c.table_id);
    const RunOptions opts = options(c);
    std::vector<ExperimentSummary> rows;
    for (const TablePlan& plan : plans) {
        const std::vector<std::size_t>& ks = c.k_grid.empty() ? plan.k_grid : c.k_grid;
        err << "table " << plan.id << std::endl;
        if (plan.design == "shrinkage") {
            for (std::size_t k : ks)
                if (k < 4) throw ConfigError{"k: shrinkage tables need k >= 4"};
            err << "design shrinkage-" << plan.shrinkage_setup << ": " << ks.size() << " k values, "
                << opts.n_trials << " trials" << std::endl;
            for (const auto& row : shrinkage_experiment(plan.shrinkage_setup, ks, plan.alpha, opts)) {
                rows.push_back(row.group_mean);
                rows.push_back(row.james_stein);
            }
            continue;
        }
        std::vector<MethodSpec> methods = plan.methods;
        for (auto& m : methods) m.map_prior = c.fitter == "map";
        if (plan.design == "pathological") {
            const std::string label = "pathological/" + c.convention;
            log_design(err, label, 20, 5, methods.size(), opts.n_trials);
            auto r = run_experiments(pathological_design(convention(c)), label, methods, opts);
            rows.insert(rows.end(), r.begin(), r.end());
            continue;
        }
        RunConfig shape = c;
        shape.design = plan.design;
        shape.mu = plan.mu;
        shape.tau = plan.tau;
        shape.sigma = 1.0;
        const std::string label = design_label(shape);
        for (std::size_t k : ks) {
            log_design(err, label, k, plan.n, methods.size(), opts.n_trials);
            const Design d = plan.design == "sup" ? Design(SupDesign{k, plan.n, plan.mu, plan.tau})
                                                  : Design(UnsupDesign::balanced(k, plan.n, plan.mu, plan.tau));
            auto r = run_experiments(d, label, methods, opts);
            rows.insert(rows.end(), r.begin(), r.end());
        }
    }
    return rows;
}

// Opened before any work so an unwritable path fails fast.
std::ofstream open_output(const RunConfig& c) {
    std::ofstream f;
    if (c.out.empty()) return f;
    f.open(c.out, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError{"cannot open '" + c.out + "' for writing"};
    return f;
}

void emit(const std::string& text, const RunConfig& c, std::ofstream& file, std::ostream& out) {
    if (c.out.empty()) {
        out << text;
        out.flush();
        if (!out) throw IoError{"failed writing to standard output"};
        return;
    }
    file << text;
    file.close();
    if (!file) throw IoError{"failed writing '" + c.out + "'"};
}

int check(const RunConfig& c, std::ostream& out) {
    const auto selected = select_criteria(c.criterion);
    if (selected.empty()) throw ConfigError{"criterion: unknown criterion '" + c.criterion + "'"};
    std::ofstream file = open_output(c);
    AcceptanceOptions o;
    if (c.trials) o.trials = *c.trials;
    if (c.seed) o.seed = *c.seed;
    o.threads = c.threads;
    std::string text;
    bool all = true;
    for (const Criterion* cr : selected) {
        const auto r = cr->run(o);
        const std::string line = format_result(r) + "\n";
        if (c.out.empty()) out << line << std::flush;
        text += line;
        all = all && r.pass;
    }
    if (!c.out.empty()) emit(text, c, file, out);
    return all ? kOk : kCheckFailed;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig c;
    std::string format = "csv";
    std::uint64_t seed = 0;
    std::size_t trials = 0;

    CLI::App app{"Conformal prediction for grouped data: simulations, table reproduction and checks", "recp"};
    app.set_config("--config", "", "Read key=value settings from a file; flags override it");
    app.allow_config_extras(false);
    app.require_subcommand(1, 1);

    app.add_option("--design", c.design, "unsup, sup or pathological")->capture_default_str();
    app.add_option("--method", c.method, "naive, subsample, randomset or cdf_band")->capture_default_str();
    app.add_option("--variant", c.variant, "mean or kde (randomset)")->capture_default_str();
    app.add_option("--k", c.k_grid, "Number of groups; comma list")->delimiter(',');
    app.add_option("--n", c.n_grid, "Observations per group; comma list (default 500)")->delimiter(',');
    app.add_option("--N", c.N_grid, "Subsample count; comma list (default 1)")->delimiter(',');
    auto* alpha = app.add_option("--alpha", c.alpha, "Miscoverage level")->capture_default_str();
    auto* delta = app.add_option("--delta", c.delta, "Level-set rate (randomset) or beta (cdf_band)")
                      ->capture_default_str();
    auto* epsilon = app.add_option("--epsilon", c.epsilon, "Region rate (randomset) or gamma (cdf_band)")
                        ->capture_default_str();
    app.add_option("--mu", c.mu, "Mean of the group parameters")->capture_default_str();
    app.add_option("--tau", c.tau, "Sd of the group parameters")->capture_default_str();
    app.add_option("--sigma", c.sigma, "Within-group sd (unsup)")->capture_default_str();
    app.add_option("--convention", c.convention, "Pathological spread convention: sd or variance")
        ->capture_default_str();
    app.add_option("--fitter", c.fitter, "Supervised fit: map or mle")->capture_default_str();
    auto* trials_opt = app.add_option("--trials", trials, "Monte-Carlo trials (default 500)");
    auto* seed_opt = app.add_option("--seed", seed, "Master seed (required for simulate and reproduce-table)");
    app.add_option("--threads", c.threads, "Worker threads")->capture_default_str();
    app.add_option("--out", c.out, "Output file (default standard output)");
    app.add_option("--format", format, "csv or json")->capture_default_str();

    auto* sim = app.add_subcommand("simulate", "Run one design sweep");
    auto* rep = app.add_subcommand("reproduce-table", "Rerun a published table");
    rep->add_option("table-id", c.table_id, "Numeric id or a name such as unsup-naive")->required();
    auto* chk = app.add_subcommand("check", "Run the acceptance criteria");
    chk->add_option("criterion", c.criterion, "Criterion name or number (default all)");
    for (auto* s : {sim, rep, chk}) s->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::FileError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    c.command = sim->parsed() ? "simulate" : rep->parsed() ? "reproduce-table" : "check";
    c.alpha_set = alpha->count() > 0;
    c.delta_set = delta->count() > 0;
    c.epsilon_set = epsilon->count() > 0;
    if (trials_opt->count() > 0) c.trials = trials;
    if (seed_opt->count() > 0) c.seed = seed;

    try {
        if (format == "csv") c.format = OutputFormat::csv;
        else if (format == "json") c.format = OutputFormat::json;
        else throw ConfigError{"format: expected csv or json"};
        validate(c);
        if (c.command == "check") return check(c, out);
        if (!c.seed) throw ConfigError{"seed: a seed is required for " + c.command};
        if (c.command == "reproduce-table") (void)resolve_table(c.table_id);
        std::ofstream file = open_output(c);

        const auto rows = c.command == "simulate" ? simulate(c, err) : reproduce(c, err);
        OutputMetadata meta;
        meta.command = c.command;
        meta.table_id = c.table_id;
        meta.convention = c.convention;
        meta.fitter = c.fitter;
        meta.trials = c.trials.value_or(500);
        meta.seed = *c.seed;
        emit(c.format == OutputFormat::json ? to_json(rows, meta) : to_csv(rows), c, file, out);
        return kOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.message << "\n";
        return kConfigError;
    } catch (const PreconditionError& e) {
        err << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const IoError& e) {
        err << "i/o error: " << e.message << "\n";
        return kIoError;
    }
}

} // namespace recp::cli
