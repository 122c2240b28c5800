#pragma once

#include <string>
#include <vector>

#include "recp/simlab.hpp"

namespace recp::cli {

// Run-level facts written alongside the rows (JSON only).
struct OutputMetadata {
    std::string command;
    std::string table_id;
    std::string convention;
    std::string fitter;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

[[nodiscard]] const std::vector<std::string>& csv_columns();

[[nodiscard]] std::string format_double(double v);

[[nodiscard]] std::string to_csv(const std::vector<ExperimentSummary>& rows);

[[nodiscard]] std::string to_json(const std::vector<ExperimentSummary>& rows, const OutputMetadata& meta);

} // namespace recp::cli
