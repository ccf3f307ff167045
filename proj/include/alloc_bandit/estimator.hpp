#pragma once

#include <cstdint>
#include <vector>

namespace alloc_bandit {

enum class EstimatorMode { Weighted, Unweighted };

inline constexpr double kWeightCap = 1e12;
inline constexpr double kFullAllocationTolerance = 1e-12;

struct AlphaCount {
    double alpha = 0.0;
    std::uint64_t count = 0;

    friend bool operator==(const AlphaCount&, const AlphaCount&) = default;
};

// Confidence state for a single job, kept entirely in reciprocal space:
// lower_recip = 1/nu_lower, upper_recip = 1/nu_upper (0 encodes infinity).
struct EstimatorState {
    double lower_recip = 0.0;
    double upper_recip = 0.0;
    double sum_wx = 0.0;
    double sum_wm = 0.0;
    double r_max = 0.0;
    std::uint64_t t = 0;
    double delta = 0.0;
    EstimatorMode mode = EstimatorMode::Weighted;

    // Diagnostics.
    std::uint64_t fully_allocated = 0;  // T(t)
    std::vector<AlphaCount> u_alpha;    // U_alpha(t) per configured alpha
    bool weight_capped = false;
    bool collapsed = false;             // clamps crossed; interval forced to a point

    double lower_nu() const { return 1.0 / lower_recip; }
    double estimate_recip() const { return sum_wm > 0.0 ? sum_wx / sum_wm : 0.0; }

    friend bool operator==(const EstimatorState&, const EstimatorState&) = default;
};

EstimatorState make_estimator(double nu_lower0, double delta,
                              EstimatorMode mode = EstimatorMode::Weighted,
                              const std::vector<double>& alphas = {});

// Confidence radius f(R, V^2, delta) from the peeled martingale Bernstein
// bound, with delta_0 = delta / (3 (R+1)^2 (V^2+1)^2).
double confidence_radius(double r_max, double v2, double delta);

// w = 1 / (1 - m * U). Throws ContractViolation on weight overflow.
double weight(const EstimatorState& state, double m);

// Feed one (allocation, outcome) pair. Requires 0 <= m <= nu_lower within
// relative tolerance. A zero allocation carries no information but still
// refreshes the interval with the current lower bound.
void apply_update(EstimatorState& state, double m, bool x);
EstimatorState update(EstimatorState state, double m, bool x);

inline double width(const EstimatorState& state) { return state.lower_recip - state.upper_recip; }

}  // namespace alloc_bandit
