#include "alloc_bandit/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "alloc_bandit/errors.hpp"

namespace alloc_bandit {

void PolicyOptions::validate() const {
    if (delta_override) {
        require(*delta_override > 0.0 && *delta_override < 1.0, "delta override must lie in (0, 1)");
    }
}

double resolve_delta(const PolicyOptions& options, std::uint64_t horizon, std::size_t num_jobs) {
    if (options.delta_override) {
        return *options.delta_override;
    }
    const double nk = static_cast<double>(horizon) * static_cast<double>(num_jobs);
    return 1.0 / (nk * nk);
}

void allocate_into(std::span<const double> lower_recips, double budget, std::span<double> out) {
    const std::size_t k = lower_recips.size();
    std::fill(out.begin(), out.end(), 0.0);
    double remaining = std::max(0.0, budget);
    // Repeated argmin of nu_lower among unallocated jobs. Every pick made
    // with budget left receives a positive amount, so a zero entry marks an
    // unallocated job; once the budget is gone the rest stay at 0.
    for (std::size_t pick = 0; pick < k && remaining > 0.0; ++pick) {
        std::size_t best = k;
        for (std::size_t j = 0; j < k; ++j) {
            if (out[j] > 0.0 || lower_recips[j] <= 0.0) {
                continue;
            }
            if (best == k || lower_recips[j] > lower_recips[best]) {
                best = j;
            }
        }
        if (best == k) {
            break;
        }
        const double m = std::min(1.0 / lower_recips[best], remaining);
        out[best] = m;
        remaining = std::max(0.0, remaining - m);
    }
}

Allocation allocate(std::span<const double> lower_recips, double budget) {
    Allocation a;
    a.m.resize(lower_recips.size());
    allocate_into(lower_recips, budget, a.m);
    return a;
}

EpisodeSummary simulate(const ProblemInstance& instance, std::vector<std::optional<EstimatorState>> estimators,
                        const PolicyOptions& options, BudgetPreemptor* preemptor, const StepObserver& observer) {
    instance.validate();
    options.validate();
    const std::size_t k = instance.num_jobs();
    require(estimators.size() == k, "one estimator slot per job is required");

    const OptimalProfile profile = optimal_profile(instance);
    RandomStream rng(options.seed);

    std::vector<double> alloc(k, 0.0);
    std::vector<double> main_alloc(k, 0.0);
    std::vector<double> lower(k, 0.0);
    std::vector<std::uint8_t> outcome(k, 0);

    EpisodeSummary summary;
    for (std::uint64_t t = 1; t <= instance.horizon; ++t) {
        std::fill(alloc.begin(), alloc.end(), 0.0);
        double preempted = 0.0;
        if (preemptor != nullptr) {
            preempted = preemptor->plan(t, alloc);
        }
        for (std::size_t j = 0; j < k; ++j) {
            lower[j] = estimators[j] ? estimators[j]->lower_recip : 0.0;
        }
        allocate_into(lower, std::max(0.0, 1.0 - preempted), main_alloc);
        for (std::size_t j = 0; j < k; ++j) {
            if (estimators[j]) {
                alloc[j] = main_alloc[j];
            }
        }

        sample_into(instance, alloc, rng, outcome);
        const double regret = std::max(0.0, profile.rho_star - expected_reward(instance, alloc));
        summary.cumulative_regret += regret;

        for (std::size_t j = 0; j < k; ++j) {
            summary.realized_successes += outcome[j];
            if (estimators[j]) {
                apply_update(*estimators[j], alloc[j], outcome[j] != 0);
            } else if (preemptor != nullptr) {
                if (auto lb = preemptor->observe(t, j, outcome[j] != 0)) {
                    estimators[j] = make_estimator(*lb, resolve_delta(options, instance.horizon, k),
                                                   options.estimator_mode, options.alphas);
                }
            }
        }

        if (observer) {
            observer(StepView{t, alloc, outcome, regret, summary.cumulative_regret, estimators});
        }
    }
    summary.final_states = std::move(estimators);
    return summary;
}

namespace {

std::vector<std::optional<EstimatorState>> initial_estimators(const ProblemInstance& instance,
                                                              std::span<const double> lower_bounds,
                                                              const PolicyOptions& options) {
    require(lower_bounds.size() == instance.num_jobs(), "one initial lower bound per job is required");
    const double delta = resolve_delta(options, instance.horizon, instance.num_jobs());
    std::vector<std::optional<EstimatorState>> states;
    states.reserve(lower_bounds.size());
    for (double lb : lower_bounds) {
        require(lb > 0.0, "initial lower bounds must be positive");
        states.emplace_back(make_estimator(lb, delta, options.estimator_mode, options.alphas));
    }
    return states;
}

}  // namespace

TraceRecorder::TraceRecorder(RunTrace& trace, bool record_intervals)
    : trace_(&trace), record_intervals_(record_intervals) {
    const std::size_t cells = trace.horizon * trace.num_jobs;
    trace.allocations.reserve(cells);
    trace.outcomes.reserve(cells);
    trace.regret.reserve(trace.horizon);
    trace.cumulative_regret.reserve(trace.horizon);
    if (record_intervals) {
        trace.lower_recips.reserve(cells);
        trace.upper_recips.reserve(cells);
    }
}

void TraceRecorder::operator()(const StepView& view) {
    trace_->allocations.insert(trace_->allocations.end(), view.allocation.begin(), view.allocation.end());
    trace_->outcomes.insert(trace_->outcomes.end(), view.outcome.begin(), view.outcome.end());
    trace_->regret.push_back(view.regret);
    trace_->cumulative_regret.push_back(view.cumulative_regret);
    if (record_intervals_) {
        for (const auto& est : view.estimators) {
            trace_->lower_recips.push_back(est ? est->lower_recip : 0.0);
            trace_->upper_recips.push_back(est ? est->upper_recip : 0.0);
        }
    }
}

EpisodeSummary run_episode_summary(const ProblemInstance& instance, std::span<const double> initial_lower_bounds,
                                   const PolicyOptions& options, const StepObserver& observer) {
    return simulate(instance, initial_estimators(instance, initial_lower_bounds, options), options, nullptr,
                    observer);
}

RunTrace run_episode(const ProblemInstance& instance, std::span<const double> initial_lower_bounds,
                     const PolicyOptions& options) {
    RunTrace trace;
    trace.num_jobs = instance.num_jobs();
    trace.horizon = instance.horizon;
    trace.metadata = {instance_fingerprint(instance), options.seed, options,
                      resolve_delta(options, instance.horizon, instance.num_jobs()), false};
    TraceRecorder recorder(trace, options.record_intervals);
    auto summary = run_episode_summary(instance, initial_lower_bounds, options, std::ref(recorder));
    trace.final_states = std::move(summary.final_states);
    trace.realized_successes = summary.realized_successes;
    return trace;
}

double theorem1_bound(const ProblemInstance& instance, std::span<const double> initial_lower_bounds,
                      std::uint64_t horizon, std::optional<double> delta_override) {
    instance.validate();
    const std::size_t k = instance.num_jobs();
    require(initial_lower_bounds.size() == k, "one initial lower bound per job is required");
    PolicyOptions opts;
    opts.delta_override = delta_override;
    const double delta = resolve_delta(opts, horizon, k);
    const double n = static_cast<double>(horizon);
    const double log_n = std::log(n);
    const double inf = std::numeric_limits<double>::infinity();

    const OptimalProfile profile = optimal_profile(instance);
    const std::size_t ell = profile.ell;

    // Per sorted rank r (0-based).
    std::vector<double> eta(k), c1(k), c2(k), lb0(k);
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t job = profile.sort_order[r];
        lb0[r] = initial_lower_bounds[job];
        require(lb0[r] > 0.0, "initial lower bounds must be positive");
        eta[r] = instance.nus[job].capped() / lb0[r];
        const double log_term = std::log(2.0 / delta) + std::log(48.0) + 4.0 * std::log(eta[r]) + 6.0 * log_n;
        c1[r] = 27.0 * log_term;
        c2[r] = 6.0 * log_term;
    }

    // u_{j,k} = c_{k,1} / (nu_lower_{k,0} Delta_{j,k}); ranks are 0-based here.
    // sum_{t <= u} 1/t <= 1 + log u for u >= 1, and the sum is empty for u < 1.
    auto log_count_term = [&](std::size_t j, std::size_t r) {
        const double gap = profile.gap(j, r);
        if (gap <= 0.0) {
            return inf;
        }
        const double u = c1[r] / (lb0[r] * gap);
        return u < 1.0 ? 0.0 : 1.0 + std::log(u);
    };

    double bound = 1.0;
    for (std::size_t r = 0; r < ell; ++r) {
        bound += c1[r] * eta[r] * (1.0 + log_n);
    }
    if (ell < k) {
        // Jobs that might be wrongly fully allocated among the ell easiest.
        if (ell >= 1) {
            for (std::size_t r = ell; r < k; ++r) {
                bound += c1[r] * eta[r] * log_count_term(ell - 1, r);
            }
        }
        for (std::size_t r = ell + 1; r < k; ++r) {
            const double gap = profile.gap(ell, r);
            if (gap <= 0.0) {
                return inf;
            }
            bound += c2[r] / (lb0[r] * gap);
        }
        for (std::size_t r = 0; r <= ell; ++r) {
            bound += c1[r] * eta[r] * (1.0 + log_n);
        }
        for (std::size_t r = ell + 1; r < k; ++r) {
            bound += c1[r] * eta[r] * log_count_term(ell, r);
        }
    }
    return bound;
}

}  // namespace alloc_bandit
