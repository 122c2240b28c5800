#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "recp/simlab.hpp"

namespace recp::cli {

// One simulated table: a design family swept over k, with every listed
// method run on the same datasets at each k.
struct TablePlan {
    std::string id;               // e.g. "3" or "unsup-naive"
    std::string design;           // unsup | sup | pathological | shrinkage
    double mu = 0.0;
    double tau = 1.0;
    std::size_t n = 500;
    std::vector<std::size_t> k_grid;
    std::vector<MethodSpec> methods;
    int shrinkage_setup = 0;      // 1 or 2 for the shrinkage tables
    double alpha = 0.1;           // shrinkage only
};

// Resolves a numeric (1-37) or named table id; throws ConfigError on an
// unknown id or on a table that is not a simulation.
[[nodiscard]] std::vector<TablePlan> resolve_table(const std::string& id);

[[nodiscard]] std::vector<std::string> table_ids();

[[nodiscard]] const std::vector<std::size_t>& standard_k_grid();

} // namespace recp::cli
