#pragma once

// Simulation designs, a seeded replicate runner and coverage summaries.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "recp/methods.hpp"

namespace recp {

// Y_ji ~ N(theta_j, sigma^2), theta_j ~ N(mu, tau^2).
struct UnsupDesign {
    std::vector<std::size_t> group_sizes;
    double mu = 0.0;
    double tau = 1.0;
    double sigma = 1.0;

    static UnsupDesign balanced(std::size_t k, std::size_t n, double mu = 0.0, double tau = 1.0, double sigma = 1.0);
    [[nodiscard]] std::size_t k() const noexcept { return group_sizes.size(); }
    void validate() const;
};

// How "N(0,10)" and "N(mu, .1)" in the pathological design are read.
enum class SpreadConvention { sd, variance };

// k = 20 groups, the first with 1000 observations and the rest with 5.
[[nodiscard]] UnsupDesign pathological_design(SpreadConvention convention = SpreadConvention::sd);

// X ~ N(0,1), Y ~ Bernoulli(logistic(theta_j X)), theta_j ~ N(mu, tau^2).
struct SupDesign {
    std::size_t k = 0;
    std::size_t n = 0;
    double mu = 0.0;
    double tau = 1.0;

    void validate() const;
};

struct UnsupDraw {
    GroupedSample groups;
    std::vector<double> thetas;
    double theta_new = 0.0;
    double y_new = 0.0;
};

struct SupDraw {
    LabeledGroups groups;
    double x_star = 0.0;
    double theta_star = 0.0;
    int y_star = 0;
};

[[nodiscard]] UnsupDraw gen_unsup(const UnsupDesign& design, Rng& rng);
[[nodiscard]] SupDraw gen_sup(const SupDesign& design, Rng& rng);

enum class MethodKind { naive, subsample, randomset, cdf_band };

struct MethodSpec {
    MethodKind kind = MethodKind::naive;
    RandomSetVariant variant = RandomSetVariant::mean;
    double alpha = 0.1;
    double delta = 0.05;    // level-set split rate; beta for cdf_band
    double epsilon = 0.05;  // region rate; gamma for cdf_band
    std::size_t n_subsamples = 1;
    bool map_prior = true;  // supervised fits: t-prior MAP, else plain MLE
    TPrior prior{};
};

[[nodiscard]] const char* to_string(MethodKind kind) noexcept;
[[nodiscard]] const char* to_string(RandomSetVariant variant) noexcept;

struct TrialResult {
    bool covered = false;
    std::optional<bool> incorrect_covered;
    double set_size = 0.0;
    bool guaranteed_full = false;
    bool failed = false;
};

struct ExperimentSummary {
    std::string design;
    std::string method;
    std::string variant;
    std::size_t k = 0;
    std::size_t n_per_group = 0;
    double alpha = 0.0;
    double delta = 0.0;
    double epsilon = 0.0;
    std::size_t N = 1;
    std::size_t n_trials = 0;
    double coverage = 0.0;
    double coverage_se = 0.0;
    std::optional<double> incorrect_coverage;
    double mean_size = 0.0;            // over trials with finite sets; inf when none are finite
    std::size_t unbounded = 0;         // trials with an infinite set
    bool full_coverage_flag = false;   // every trial was whole-space by level arithmetic alone
    std::size_t failures = 0;          // trials whose fit failed; counted as not covered
    std::uint64_t seed = 0;
    std::uint64_t data_digest = 0;     // hash of every generated dataset, in trial order
};

struct RunOptions {
    std::size_t n_trials = 500;
    std::uint64_t seed = 0;
    std::size_t threads = 1;
};

using Design = std::variant<UnsupDesign, SupDesign>;

// Runs every method on the same per-trial datasets. Trial t draws its data
// from stream (seed, t); method m then uses its own stream derived from that.
[[nodiscard]] std::vector<ExperimentSummary> run_experiments(const Design& design, const std::string& design_id,
                                                             const std::vector<MethodSpec>& methods,
                                                             const RunOptions& options);

[[nodiscard]] ExperimentSummary run_experiment(const Design& design, const std::string& design_id,
                                               const MethodSpec& method, const RunOptions& options);

[[nodiscard]] TrialResult run_trial(const Design& design, const MethodSpec& method, std::uint64_t seed,
                                    std::size_t trial);

struct ShrinkageRow {
    std::size_t k = 0;
    ExperimentSummary group_mean;
    ExperimentSummary james_stein;
};

// Set-up 1: sigma^2 = 1; set-up 2: sigma^2 = 100. n_j = 10, theta ~ N(0,1);
// both estimators predict a new observation of the first group on the
// same datasets.
[[nodiscard]] std::vector<ShrinkageRow> shrinkage_experiment(int setup, const std::vector<std::size_t>& k_grid,
                                                             double alpha, const RunOptions& options);

[[nodiscard]] double monte_carlo_se(double p, std::size_t n) noexcept;

} // namespace recp
