#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alloc_bandit/estimator.hpp"

namespace alloc_bandit {

struct PolicyOptions {
    EstimatorMode estimator_mode = EstimatorMode::Weighted;
    std::optional<double> delta_override;
    bool record_intervals = false;
    std::uint64_t seed = 0;
    // U_alpha diagnostics thresholds carried by every estimator.
    std::vector<double> alphas;

    void validate() const;
};

// delta_override if present, otherwise (nK)^-2.
double resolve_delta(const PolicyOptions& options, std::uint64_t horizon, std::size_t num_jobs);

// Outcome of one halving initializer.
struct InitRecord {
    std::size_t job = 0;
    std::uint64_t start_step = 1;         // global step the initializer began
    std::uint64_t steps_used = 0;         // tau
    double lower_bound = 0.0;             // 2^-tau
    std::vector<double> consumption;      // 2^-1, 2^-2, ..., 2^-tau
    bool hit_iteration_cap = false;

    friend bool operator==(const InitRecord&, const InitRecord&) = default;
};

struct TraceMetadata {
    std::uint64_t instance_hash = 0;
    std::uint64_t seed = 0;
    PolicyOptions options;
    double delta = 0.0;
    bool self_initializing = false;
};

// Full per-step record of an episode. Per-job columns are stored row-major
// (step-major) in flat vectors of length horizon * K.
struct RunTrace {
    std::size_t num_jobs = 0;
    std::uint64_t horizon = 0;
    std::vector<double> allocations;
    std::vector<std::uint8_t> outcomes;
    std::vector<double> regret;
    std::vector<double> cumulative_regret;
    // Filled only when options.record_intervals; jobs without an estimator
    // yet (still initializing) report 0 for both.
    std::vector<double> lower_recips;
    std::vector<double> upper_recips;
    std::vector<std::optional<EstimatorState>> final_states;
    std::vector<InitRecord> init_records;
    std::uint64_t realized_successes = 0;
    TraceMetadata metadata;

    std::size_t length() const { return regret.size(); }
    std::span<const double> allocation(std::size_t step) const {
        return std::span<const double>(allocations).subspan(step * num_jobs, num_jobs);
    }
    std::span<const std::uint8_t> outcome(std::size_t step) const {
        return std::span<const std::uint8_t>(outcomes).subspan(step * num_jobs, num_jobs);
    }
    bool has_intervals() const { return !lower_recips.empty(); }
    double total_regret() const { return cumulative_regret.empty() ? 0.0 : cumulative_regret.back(); }
};

}  // namespace alloc_bandit
