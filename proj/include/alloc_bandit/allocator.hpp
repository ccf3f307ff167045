#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "alloc_bandit/estimator.hpp"
#include "alloc_bandit/model.hpp"
#include "alloc_bandit/trace.hpp"

namespace alloc_bandit {

// Optimistic greedy allocation. Jobs are served in decreasing order of
// lower_recips (easiest first, lowest index on ties), each receiving
// min{1/L_k, remaining budget}. A job with L_k == 0 is excluded and gets 0.
Allocation allocate(std::span<const double> lower_recips, double budget = 1.0);
void allocate_into(std::span<const double> lower_recips, double budget, std::span<double> out);

// What the episode loop exposes to observers after each step.
struct StepView {
    std::uint64_t t = 0;  // 1-based
    std::span<const double> allocation;
    std::span<const std::uint8_t> outcome;
    double regret = 0.0;
    double cumulative_regret = 0.0;
    std::span<const std::optional<EstimatorState>> estimators;
};

using StepObserver = std::function<void(const StepView&)>;

// Something that owns part of the per-step budget before the main policy
// allocates. The main policy only serves jobs that already have estimators.
class BudgetPreemptor {
public:
    virtual ~BudgetPreemptor() = default;
    // Write this step's allocations for the jobs it controls into `alloc`
    // (all entries arrive zeroed) and return their sum.
    virtual double plan(std::uint64_t t, std::span<double> alloc) = 0;
    // Outcome for a job without an estimator. Returns the initial lower
    // bound once that job is ready to join the main policy.
    virtual std::optional<double> observe(std::uint64_t t, std::size_t job, bool x) = 0;
};

struct EpisodeSummary {
    double cumulative_regret = 0.0;
    std::uint64_t realized_successes = 0;
    std::vector<std::optional<EstimatorState>> final_states;
};

// Core loop shared by the plain and self-initializing algorithms.
EpisodeSummary simulate(const ProblemInstance& instance, std::vector<std::optional<EstimatorState>> estimators,
                        const PolicyOptions& options, BudgetPreemptor* preemptor,
                        const StepObserver& observer = {});

// Plain algorithm started from known lower bounds nu_lower_{k,0}.
RunTrace run_episode(const ProblemInstance& instance, std::span<const double> initial_lower_bounds,
                     const PolicyOptions& options);
EpisodeSummary run_episode_summary(const ProblemInstance& instance, std::span<const double> initial_lower_bounds,
                                   const PolicyOptions& options, const StepObserver& observer = {});

// Evaluates the worst-case regret bound for known initial lower bounds.
// Returns +inf when a gap it divides by is not positive.
double theorem1_bound(const ProblemInstance& instance, std::span<const double> initial_lower_bounds,
                      std::uint64_t horizon, std::optional<double> delta_override = std::nullopt);

// Collects steps into a RunTrace; shared by run_episode and run_modified.
class TraceRecorder {
public:
    TraceRecorder(RunTrace& trace, bool record_intervals);
    void operator()(const StepView& view);

private:
    RunTrace* trace_;
    bool record_intervals_;
};

}  // namespace alloc_bandit
