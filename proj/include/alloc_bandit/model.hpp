#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "alloc_bandit/random.hpp"

namespace alloc_bandit {

inline constexpr double kBudgetTolerance = 1e-9;

// Difficulty of a job, stored as its reciprocal 1/nu. An unbounded job
// (nu = infinity) has reciprocal 0, so no infinities leak into the math.
class Difficulty {
public:
    static Difficulty of(double nu);
    static Difficulty unbounded() { return Difficulty(0.0, 0.0); }
    static Difficulty from_reciprocal(double recip);

    bool is_unbounded() const { return recip_ == 0.0; }
    double reciprocal() const { return recip_; }
    // Throws for unbounded jobs; use reciprocal() in arithmetic.
    double nu() const;
    // min{1, nu}
    double capped() const { return recip_ <= 1.0 ? 1.0 : nu_; }

    friend bool operator==(const Difficulty& a, const Difficulty& b) { return a.recip_ == b.recip_; }

private:
    Difficulty(double nu, double recip) : nu_(nu), recip_(recip) {}
    double nu_;     // meaningless when unbounded
    double recip_;
};

struct ProblemInstance {
    std::vector<Difficulty> nus;
    std::uint64_t horizon = 1;
    std::uint64_t base_seed = 0;

    std::size_t num_jobs() const { return nus.size(); }
    void validate() const;
};

// Stable 64-bit fingerprint of (nus, horizon, seed) for trace metadata.
std::uint64_t instance_fingerprint(const ProblemInstance& instance);

ProblemInstance make_instance(std::span<const double> nus, std::uint64_t horizon,
                              std::uint64_t seed = 0);

// Resources per job in one step. Sum must stay within the unit budget.
struct Allocation {
    std::vector<double> m;

    double total() const;
    void validate() const;
};

// Binary outcome per job; 1 means the job completed this step.
struct Observation {
    std::vector<std::uint8_t> x;
};

struct OptimalProfile {
    Allocation m_star;                    // original job indexing
    std::size_t ell = 0;                  // number of fully-allocated jobs
    double s_star = 0.0;                  // overflow budget of job ell+1
    double rho_star = 0.0;                // optimal expected reward per step
    std::vector<std::size_t> sort_order;  // sorted rank -> job index
    std::vector<double> sorted_recips;    // 1/nu in sorted (easiest first) order

    // 1/nu_j - 1/nu_k over 0-based sorted ranks.
    double gap(std::size_t j, std::size_t k) const { return sorted_recips[j] - sorted_recips[k]; }
};

// Bernoulli success probability min{1, x}.
double beta(double x);

// beta(m / nu) with the unbounded convention m / infinity = 0.
double success_probability(double m, Difficulty nu);

OptimalProfile optimal_profile(const ProblemInstance& instance);

struct BruteForceResult {
    Allocation allocation;
    double reward = 0.0;
};

// Exhaustive search over the simplex grid. Test oracle; refuses K > 4.
BruteForceResult brute_force_optimal(const ProblemInstance& instance, double grid_step);

double expected_reward(const ProblemInstance& instance, std::span<const double> alloc);

// Draws one outcome per job in job-index order (exactly K uniforms).
Observation sample_step(const ProblemInstance& instance, const Allocation& alloc, RandomStream& rng);
void sample_into(const ProblemInstance& instance, std::span<const double> alloc, RandomStream& rng,
                 std::span<std::uint8_t> out);

// Pseudo-regret rho* - sum_k beta(M_k / nu_k).
double instantaneous_regret(const OptimalProfile& profile, const Allocation& alloc,
                            const ProblemInstance& instance);

}  // namespace alloc_bandit
