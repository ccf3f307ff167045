#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "alloc_bandit/allocator.hpp"
#include "alloc_bandit/model.hpp"
#include "alloc_bandit/random.hpp"
#include "alloc_bandit/trace.hpp"

namespace alloc_bandit {

inline constexpr std::uint64_t kHalvingIterationCap = 64;

// Halving search for a lower bound on nu: allocate 2^-1, 2^-2, ... and stop
// at the first failure, returning the allocation that failed.
class HalvingInitializer {
public:
    explicit HalvingInitializer(std::size_t job = 0, std::uint64_t start_step = 1);

    bool done() const { return finished_; }
    // Allocation for the next local step, 2^-(steps so far + 1).
    double next_allocation() const;
    // Feed the outcome of next_allocation(). Returns true when finished.
    bool observe(bool x);
    const InitRecord& record() const { return record_; }

private:
    InitRecord record_;
    bool finished_ = false;
};

InitRecord halving_init(Difficulty nu, RandomStream& rng);

// min{1, nu} / nu_lower0
double sample_eta(Difficulty nu, double nu_lower0);

// Total consumption of the K offset initializers at global step t when all
// are still running: sum_k 1{t >= k} 2^(k - t - 1).
double init_budget(std::uint64_t t, std::size_t num_jobs);

// Job k (0-based) starts its initializer at global step k + 1.
class OffsetHalvingSchedule final : public BudgetPreemptor {
public:
    explicit OffsetHalvingSchedule(std::size_t num_jobs);

    double plan(std::uint64_t t, std::span<double> alloc) override;
    std::optional<double> observe(std::uint64_t t, std::size_t job, bool x) override;

    std::vector<InitRecord> records() const;

private:
    std::vector<HalvingInitializer> initializers_;
    std::vector<bool> active_;  // allocated to during the current step
};

struct ModifiedSummary {
    EpisodeSummary episode;
    std::vector<InitRecord> init_records;
};

// Self-initializing algorithm: K offset halving initializers share the
// budget with the main policy, which only serves initialized jobs.
RunTrace run_modified(const ProblemInstance& instance, const PolicyOptions& options);
ModifiedSummary run_modified_summary(const ProblemInstance& instance, const PolicyOptions& options,
                                     const StepObserver& observer = {});

struct HalvingStats {
    double mean_eta = 0.0;
    double stderr_eta = 0.0;
    double mean_steps = 0.0;
    std::size_t replications = 0;
    std::size_t cap_hits = 0;
    std::size_t bound_violations = 0;  // runs with nu_lower0 >= nu
};

HalvingStats halving_statistics(Difficulty nu, std::size_t replications, std::uint64_t seed);

}  // namespace alloc_bandit
