#include "alloc_bandit/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

#include "alloc_bandit/errors.hpp"

namespace alloc_bandit {

Difficulty Difficulty::of(double nu) {
    if (std::isinf(nu) && nu > 0) {
        return unbounded();
    }
    require(std::isfinite(nu) && nu > 0.0, "difficulty must be positive, got " + std::to_string(nu));
    return Difficulty(nu, 1.0 / nu);
}

Difficulty Difficulty::from_reciprocal(double recip) {
    require(std::isfinite(recip) && recip >= 0.0, "reciprocal difficulty must be finite and >= 0");
    return recip == 0.0 ? unbounded() : Difficulty(1.0 / recip, recip);
}

double Difficulty::nu() const {
    require(!is_unbounded(), "unbounded difficulty has no finite value");
    return nu_;
}

void ProblemInstance::validate() const {
    require(!nus.empty(), "instance needs at least one job");
    require(horizon >= 1, "horizon must be >= 1");
}

ProblemInstance make_instance(std::span<const double> nus, std::uint64_t horizon, std::uint64_t seed) {
    ProblemInstance inst;
    inst.nus.reserve(nus.size());
    for (double nu : nus) {
        inst.nus.push_back(Difficulty::of(nu));
    }
    inst.horizon = horizon;
    inst.base_seed = seed;
    inst.validate();
    return inst;
}

std::uint64_t instance_fingerprint(const ProblemInstance& instance) {
    // FNV-1a over the raw bit patterns.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) {
            h ^= (v >> (8 * i)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    for (const auto& nu : instance.nus) {
        feed(std::bit_cast<std::uint64_t>(nu.reciprocal()));
    }
    feed(instance.horizon);
    feed(instance.base_seed);
    return h;
}

double Allocation::total() const { return std::accumulate(m.begin(), m.end(), 0.0); }

void Allocation::validate() const {
    for (double v : m) {
        require(v >= 0.0, "allocation entries must be non-negative");
    }
    require(total() <= 1.0 + kBudgetTolerance, "allocation exceeds the unit budget");
}

double beta(double x) {
    require(x >= 0.0, "beta is defined for non-negative arguments only");
    return std::min(1.0, x);
}

double success_probability(double m, Difficulty nu) {
    // Divide rather than multiply by the reciprocal so that m == nu gives exactly 1.
    return nu.is_unbounded() ? beta(m * 0.0) : beta(m / nu.nu());
}

OptimalProfile optimal_profile(const ProblemInstance& instance) {
    instance.validate();
    const std::size_t k = instance.num_jobs();

    OptimalProfile p;
    p.sort_order.resize(k);
    std::iota(p.sort_order.begin(), p.sort_order.end(), std::size_t{0});
    // Easiest first: largest reciprocal first, stable for ties.
    std::stable_sort(p.sort_order.begin(), p.sort_order.end(), [&](std::size_t a, std::size_t b) {
        return instance.nus[a].reciprocal() > instance.nus[b].reciprocal();
    });

    p.sorted_recips.resize(k);
    p.m_star.m.assign(k, 0.0);
    double remaining = 1.0;
    for (std::size_t rank = 0; rank < k; ++rank) {
        const std::size_t job = p.sort_order[rank];
        const Difficulty nu = instance.nus[job];
        p.sorted_recips[rank] = nu.reciprocal();
        if (remaining <= 0.0) {
            continue;
        }
        if (!nu.is_unbounded() && nu.nu() <= remaining + 1e-12) {
            p.m_star.m[job] = nu.nu();
            remaining = std::max(0.0, remaining - nu.nu());
            ++p.ell;
        } else {
            p.m_star.m[job] = remaining;
            remaining = 0.0;
        }
    }
    if (p.ell < k) {
        const std::size_t overflow = p.sort_order[p.ell];
        p.s_star = p.m_star.m[overflow];
        p.rho_star = static_cast<double>(p.ell) + p.s_star * p.sorted_recips[p.ell];
    } else {
        p.s_star = 0.0;
        p.rho_star = static_cast<double>(k);
    }
    return p;
}

double expected_reward(const ProblemInstance& instance, std::span<const double> alloc) {
    double reward = 0.0;
    for (std::size_t i = 0; i < alloc.size(); ++i) {
        reward += success_probability(alloc[i], instance.nus[i]);
    }
    return reward;
}

BruteForceResult brute_force_optimal(const ProblemInstance& instance, double grid_step) {
    instance.validate();
    const std::size_t k = instance.num_jobs();
    require(k <= 4, "brute_force_optimal refuses K > 4 (combinatorial blowup)");
    require(grid_step > 0.0 && grid_step <= 0.1, "grid_step must lie in (0, 0.1]");

    const auto units = static_cast<long>(std::floor(1.0 / grid_step + 1e-9));
    BruteForceResult best;
    best.reward = -1.0;
    std::vector<long> counts(k, 0);
    std::vector<double> alloc(k, 0.0);

    // Enumerate the first K-1 coordinates; the last job takes whatever is
    // left, which is never worse since beta is non-decreasing.
    auto evaluate = [&] {
        long used = 0;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            used += counts[i];
        }
        counts[k - 1] = units - used;
        for (std::size_t i = 0; i < k; ++i) {
            alloc[i] = static_cast<double>(counts[i]) * grid_step;
        }
        const double r = expected_reward(instance, alloc);
        if (r > best.reward) {
            best.reward = r;
            best.allocation.m = alloc;
        }
    };

    auto recurse = [&](auto&& self, std::size_t idx, long left) -> void {
        if (idx + 1 >= k) {
            evaluate();
            return;
        }
        for (long c = 0; c <= left; ++c) {
            counts[idx] = c;
            self(self, idx + 1, left - c);
        }
    };
    recurse(recurse, 0, units);
    return best;
}

void sample_into(const ProblemInstance& instance, std::span<const double> alloc, RandomStream& rng,
                 std::span<std::uint8_t> out) {
    for (std::size_t i = 0; i < alloc.size(); ++i) {
        out[i] = rng.bernoulli(success_probability(alloc[i], instance.nus[i])) ? 1 : 0;
    }
}

Observation sample_step(const ProblemInstance& instance, const Allocation& alloc, RandomStream& rng) {
    require(alloc.m.size() == instance.num_jobs(), "allocation size must equal K");
    alloc.validate();
    Observation obs;
    obs.x.resize(alloc.m.size());
    sample_into(instance, alloc.m, rng, obs.x);
    return obs;
}

double instantaneous_regret(const OptimalProfile& profile, const Allocation& alloc,
                            const ProblemInstance& instance) {
    return profile.rho_star - expected_reward(instance, alloc.m);
}

}  // namespace alloc_bandit
