#include "alloc_bandit/init.hpp"

#include <algorithm>
#include <cmath>

#include "alloc_bandit/errors.hpp"

namespace alloc_bandit {

HalvingInitializer::HalvingInitializer(std::size_t job, std::uint64_t start_step) {
    record_.job = job;
    record_.start_step = start_step;
}

double HalvingInitializer::next_allocation() const {
    return std::ldexp(1.0, -static_cast<int>(record_.steps_used + 1));
}

bool HalvingInitializer::observe(bool x) {
    require(!finished_, "halving initializer already finished");
    const double m = next_allocation();
    record_.consumption.push_back(m);
    ++record_.steps_used;
    record_.lower_bound = m;
    if (!x) {
        finished_ = true;
    } else if (record_.steps_used >= kHalvingIterationCap) {
        finished_ = true;
        record_.hit_iteration_cap = true;
    }
    return finished_;
}

InitRecord halving_init(Difficulty nu, RandomStream& rng) {
    HalvingInitializer init;
    while (!init.done()) {
        init.observe(rng.bernoulli(success_probability(init.next_allocation(), nu)));
    }
    return init.record();
}

double sample_eta(Difficulty nu, double nu_lower0) {
    require(nu_lower0 > 0.0, "initial lower bound must be positive");
    return nu.capped() / nu_lower0;
}

double init_budget(std::uint64_t t, std::size_t num_jobs) {
    require(t >= 1, "steps are 1-based");
    double total = 0.0;
    for (std::size_t k = 1; k <= num_jobs && k <= t; ++k) {
        total += std::ldexp(1.0, static_cast<int>(k) - static_cast<int>(t) - 1);
    }
    return total;
}

OffsetHalvingSchedule::OffsetHalvingSchedule(std::size_t num_jobs) : active_(num_jobs, false) {
    initializers_.reserve(num_jobs);
    for (std::size_t k = 0; k < num_jobs; ++k) {
        initializers_.emplace_back(k, k + 1);
    }
}

double OffsetHalvingSchedule::plan(std::uint64_t t, std::span<double> alloc) {
    double total = 0.0;
    for (std::size_t k = 0; k < initializers_.size(); ++k) {
        const auto& init = initializers_[k];
        active_[k] = t >= init.record().start_step && !init.done();
        if (active_[k]) {
            alloc[k] = init.next_allocation();
            total += alloc[k];
        }
    }
    return total;
}

std::optional<double> OffsetHalvingSchedule::observe(std::uint64_t, std::size_t job, bool x) {
    if (!active_[job]) {
        return std::nullopt;
    }
    active_[job] = false;
    if (initializers_[job].observe(x)) {
        return initializers_[job].record().lower_bound;
    }
    return std::nullopt;
}

std::vector<InitRecord> OffsetHalvingSchedule::records() const {
    std::vector<InitRecord> out;
    out.reserve(initializers_.size());
    for (const auto& init : initializers_) {
        out.push_back(init.record());
    }
    return out;
}

ModifiedSummary run_modified_summary(const ProblemInstance& instance, const PolicyOptions& options,
                                     const StepObserver& observer) {
    OffsetHalvingSchedule schedule(instance.num_jobs());
    ModifiedSummary out;
    out.episode = simulate(instance, std::vector<std::optional<EstimatorState>>(instance.num_jobs()), options,
                           &schedule, observer);
    out.init_records = schedule.records();
    return out;
}

RunTrace run_modified(const ProblemInstance& instance, const PolicyOptions& options) {
    RunTrace trace;
    trace.num_jobs = instance.num_jobs();
    trace.horizon = instance.horizon;
    trace.metadata = {instance_fingerprint(instance), options.seed, options,
                      resolve_delta(options, instance.horizon, instance.num_jobs()), true};
    TraceRecorder recorder(trace, options.record_intervals);
    auto summary = run_modified_summary(instance, options, std::ref(recorder));
    trace.final_states = std::move(summary.episode.final_states);
    trace.realized_successes = summary.episode.realized_successes;
    trace.init_records = std::move(summary.init_records);
    return trace;
}

HalvingStats halving_statistics(Difficulty nu, std::size_t replications, std::uint64_t seed) {
    require(replications >= 1, "need at least one replication");
    HalvingStats stats;
    stats.replications = replications;
    double sum = 0.0;
    double sum_sq = 0.0;
    double steps = 0.0;
    for (std::size_t r = 0; r < replications; ++r) {
        RandomStream rng(derive_seed(seed, r));
        const InitRecord rec = halving_init(nu, rng);
        const double eta = sample_eta(nu, rec.lower_bound);
        sum += eta;
        sum_sq += eta * eta;
        steps += static_cast<double>(rec.steps_used);
        stats.cap_hits += rec.hit_iteration_cap ? 1 : 0;
        if (!nu.is_unbounded() && rec.lower_bound >= nu.nu()) {
            ++stats.bound_violations;
        }
    }
    const double n = static_cast<double>(replications);
    stats.mean_eta = sum / n;
    stats.mean_steps = steps / n;
    if (replications > 1) {
        const double var = (sum_sq - n * stats.mean_eta * stats.mean_eta) / (n - 1.0);
        stats.stderr_eta = std::sqrt(std::max(0.0, var) / n);
    }
    return stats;
}

}  // namespace alloc_bandit
