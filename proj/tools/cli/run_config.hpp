#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recp/simlab.hpp"

namespace recp::cli {

enum class OutputFormat { csv, json };

// Everything a command needs, gathered from flags and an optional
// key=value file.
struct RunConfig {
    std::string command;
    std::string table_id;
    std::string criterion;

    std::string design = "unsup";  // unsup | sup | pathological
    std::string method = "naive";  // naive | subsample | randomset | cdf_band
    std::string variant = "mean";  // mean | kde
    std::string convention = "sd"; // pathological spread convention: sd | variance
    std::string fitter = "map";    // map | mle

    std::vector<std::size_t> k_grid;
    std::vector<std::size_t> n_grid;
    std::vector<std::size_t> N_grid;
    double alpha = 0.1;
    double delta = 0.05;
    double epsilon = 0.05;
    double mu = 0.0;
    double tau = 1.0;
    double sigma = 1.0;

    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
    std::string out;
    OutputFormat format = OutputFormat::csv;

    bool alpha_set = false;
    bool delta_set = false;
    bool epsilon_set = false;
};

// Thrown for invalid configurations; the message names the offending field.
struct ConfigError {
    std::string message;
};

// Field-level checks shared by every command.
void validate(const RunConfig& config);

[[nodiscard]] MethodSpec method_spec(const RunConfig& config, std::size_t n_subsamples);

} // namespace recp::cli
