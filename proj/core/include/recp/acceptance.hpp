#pragma once

// Acceptance suite: coverage and property checks with fixed targets.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace recp {

struct AcceptanceOptions {
    std::size_t trials = 500;  // Monte-Carlo replicates per design point
    std::uint64_t seed = 20240601;
    std::size_t threads = 1;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string observed;
    std::string target;
    std::string tolerance;
};

struct Criterion {
    int id = 0;
    std::string name;
    std::function<CriterionResult(const AcceptanceOptions&)> run;
};

[[nodiscard]] const std::vector<Criterion>& acceptance_criteria();

// Criteria whose name or numeric id equals `filter`; all when empty.
[[nodiscard]] std::vector<const Criterion*> select_criteria(const std::string& filter);

[[nodiscard]] std::string format_result(const CriterionResult& r);

} // namespace recp
