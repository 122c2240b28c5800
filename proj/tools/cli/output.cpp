#include "output.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <json.hpp>

#include "recp/kde2d.hpp"

namespace recp::cli {

namespace {

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// Shortest round-trip text; unaffected by the process locale.
std::string csv_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return format_double(v);
}

nlohmann::ordered_json json_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return v;
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "method",       "variant",   "k",           "n_per_group", "alpha",     "delta",
        "epsilon",      "N",         "trials",      "coverage",    "incorrect_coverage",
        "mean_size",    "full_coverage_flag",       "failures",    "seed",      "design",
        "coverage_se",  "unbounded", "data_digest"};
    return cols;
}

std::string to_csv(const std::vector<ExperimentSummary>& rows) {
    std::string out;
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) {
        if (i) out += ',';
        out += cols[i];
    }
    out += '\n';
    for (const auto& s : rows) {
        const std::string fields[] = {
            s.method,
            s.variant,
            std::to_string(s.k),
            std::to_string(s.n_per_group),
            csv_double(s.alpha),
            csv_double(s.delta),
            csv_double(s.epsilon),
            std::to_string(s.N),
            std::to_string(s.n_trials),
            csv_double(s.coverage),
            s.incorrect_coverage ? csv_double(*s.incorrect_coverage) : std::string(),
            csv_double(s.mean_size),
            s.full_coverage_flag ? "true" : "false",
            std::to_string(s.failures),
            std::to_string(s.seed),
            s.design,
            csv_double(s.coverage_se),
            std::to_string(s.unbounded),
            hex64(s.data_digest),
        };
        bool first = true;
        for (const auto& f : fields) {
            if (!first) out += ',';
            first = false;
            if (f.find_first_of(",\"\n") != std::string::npos) {
                out += '"';
                for (char c : f) {
                    if (c == '"') out += '"';
                    out += c;
                }
                out += '"';
            } else {
                out += f;
            }
        }
        out += '\n';
    }
    return out;
}

std::string to_json(const std::vector<ExperimentSummary>& rows, const OutputMetadata& meta) {
    using nlohmann::ordered_json;
    const GridSpec grid{};
    ordered_json doc;
    doc["metadata"] = {
        {"command", meta.command},
        {"table_id", meta.table_id},
        {"trials", meta.trials},
        {"seed", meta.seed},
        {"spread_convention", meta.convention},
        {"logistic_fitter", meta.fitter},
        {"kde_grid_resolution", grid.resolution},
        {"kde_grid_pad_sd", grid.pad_sd},
    };
    ordered_json results = ordered_json::array();
    for (const auto& s : rows) {
        ordered_json r;
        r["design"] = s.design;
        r["method"] = s.method;
        r["variant"] = s.variant;
        r["k"] = s.k;
        r["n_per_group"] = s.n_per_group;
        r["alpha"] = json_double(s.alpha);
        r["delta"] = json_double(s.delta);
        r["epsilon"] = json_double(s.epsilon);
        r["N"] = s.N;
        r["n_trials"] = s.n_trials;
        r["coverage"] = json_double(s.coverage);
        r["coverage_se"] = json_double(s.coverage_se);
        r["incorrect_coverage"] = s.incorrect_coverage ? json_double(*s.incorrect_coverage) : ordered_json(nullptr);
        r["mean_size"] = json_double(s.mean_size);
        r["unbounded"] = s.unbounded;
        r["full_coverage_flag"] = s.full_coverage_flag;
        r["failures"] = s.failures;
        r["seed"] = s.seed;
        r["data_digest"] = hex64(s.data_digest);
        results.push_back(std::move(r));
    }
    doc["results"] = std::move(results);
    return doc.dump(2) + "\n";
}

} // namespace recp::cli
