#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "alloc_bandit/estimator.hpp"
#include "alloc_bandit/model.hpp"

namespace alloc_bandit {

struct ArmSpec {
    std::string name = "weighted";
    EstimatorMode mode = EstimatorMode::Weighted;
};

// A sweep over one parameter of a fixed instance template. The swept
// parameter is either "horizon" or "nu<k>" (1-based job index).
struct ExperimentConfig {
    std::string id = "experiment";
    std::vector<Difficulty> nus;
    // Known initial lower bounds; absent selects the self-initializing algorithm.
    std::optional<std::vector<double>> lower_bounds;
    std::string sweep_parameter = "horizon";
    std::vector<double> sweep_values;
    std::uint64_t horizon = 1;
    std::size_t replications = 300;
    std::vector<ArmSpec> arms{ArmSpec{}};
    std::uint64_t base_seed = 0;
    std::optional<double> delta;
    std::string output;

    void validate() const;
    // The concrete instance at one grid value.
    ProblemInstance instance_at(double grid_value) const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct GridPointResult {
    double grid_value = 0.0;
    std::string arm;
    double mean_regret = 0.0;
    double stderr_regret = 0.0;
    std::size_t replications = 0;
    std::vector<double> samples;  // per replication, index order
};

struct ExperimentResult {
    std::string id;
    std::vector<GridPointResult> points;  // grid-major, then arm order

    const GridPointResult* find(double grid_value, const std::string& arm) const;
};

struct MeanStderr {
    double mean = 0.0;
    double std_error = 0.0;
};

// Sample mean and std/sqrt(n). Summation runs over sorted values so the
// result does not depend on replication order.
MeanStderr mean_and_stderr(std::span<const double> samples);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Percentile bootstrap interval for the mean.
Interval bootstrap_mean_ci(std::span<const double> samples, double level = 0.95, std::size_t resamples = 4000,
                           std::uint64_t seed = 0x5eed);

// Worker count: `requested` if nonzero, else ALLOC_BANDIT_THREADS if set
// and nonzero, else hardware concurrency.
std::size_t resolve_thread_count(std::size_t requested = 0);

// Runs task(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task);

// Cumulative pseudo-regret of one episode. Known lower bounds run the plain
// algorithm; otherwise the self-initializing one.
double episode_regret(const ProblemInstance& instance, const std::optional<std::vector<double>>& lower_bounds,
                      EstimatorMode mode, std::optional<double> delta, std::uint64_t seed);

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t threads = 0);

// Columns: grid_value,arm,mean_regret,stderr,reps
std::string format_experiment_csv(const ExperimentResult& result);
void emit_csv(const ExperimentResult& result, const std::filesystem::path& path);

// Instance k: nu_j = 2 for j != k, nu_k = 2/(1+eps), eps = sqrt(K/(8n)).
std::vector<ProblemInstance> minimax_family(std::uint64_t horizon, std::size_t num_jobs);

struct MinimaxResult {
    std::vector<double> mean_regret;  // per family member
    std::vector<double> stderr_regret;
    double sup_regret = 0.0;
    double ratio = 0.0;        // sup_regret / sqrt(nK)
    double lower_bound = 0.0;  // sqrt(nK) / (16 sqrt 2)
    std::size_t replications = 0;
};

MinimaxResult minimax_stress(std::uint64_t horizon, std::size_t num_jobs, std::size_t replications,
                             std::uint64_t seed, EstimatorMode mode = EstimatorMode::Weighted,
                             std::size_t threads = 0);

}  // namespace alloc_bandit
