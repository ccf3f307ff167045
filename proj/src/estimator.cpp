#include "alloc_bandit/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "alloc_bandit/errors.hpp"

namespace alloc_bandit {

EstimatorState make_estimator(double nu_lower0, double delta, EstimatorMode mode,
                              const std::vector<double>& alphas) {
    require(std::isfinite(nu_lower0) && nu_lower0 > 0.0, "initial lower bound must be positive");
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    EstimatorState s;
    s.lower_recip = 1.0 / nu_lower0;
    s.upper_recip = 0.0;
    s.delta = delta;
    s.mode = mode;
    s.u_alpha.reserve(alphas.size());
    for (double a : alphas) {
        require(a > 0.0, "alpha thresholds must be positive");
        s.u_alpha.push_back({a, 0});
    }
    return s;
}

double confidence_radius(double r_max, double v2, double delta) {
    require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
    require(r_max >= 0.0 && v2 >= 0.0, "f requires non-negative R and V^2");
    const double r1 = r_max + 1.0;
    const double v1 = v2 + 1.0;
    // log(2/delta_0) expanded so that huge R or V^2 cannot underflow delta_0.
    const double log_term = std::log(2.0 / delta) + std::log(3.0) + 2.0 * std::log(r1) + 2.0 * std::log(v1);
    const double a = r1 / 3.0 * log_term;
    return a + std::sqrt(2.0 * v1 * log_term + a * a);
}

double weight(const EstimatorState& state, double m) {
    require(m >= 0.0, "allocation must be non-negative");
    const double denom = 1.0 - m * state.upper_recip;
    require(denom > kFullAllocationTolerance, "weight overflow: allocation reaches the upper bound");
    return 1.0 / denom;
}

namespace {

double capped_weight(EstimatorState& state, double m) {
    if (state.mode == EstimatorMode::Unweighted) {
        return 1.0;
    }
    const double denom = 1.0 - m * state.upper_recip;
    if (denom <= 1.0 / kWeightCap) {
        state.weight_capped = true;
        return kWeightCap;
    }
    return 1.0 / denom;
}

}  // namespace

void apply_update(EstimatorState& state, double m, bool x) {
    const double lower_prev = state.lower_recip;
    const double nu_lower_prev = 1.0 / lower_prev;
    require(m >= 0.0, "allocation must be non-negative");
    require(m <= nu_lower_prev * (1.0 + kFullAllocationTolerance),
            "allocation exceeds the current lower bound on nu");

    const double w = capped_weight(state, m);
    if (x) {
        state.sum_wx += w;
    }
    state.sum_wm += w * m;
    state.r_max = std::max(state.r_max, w);
    ++state.t;

    if (std::abs(m - nu_lower_prev) <= kFullAllocationTolerance * nu_lower_prev) {
        ++state.fully_allocated;
    }
    for (auto& ua : state.u_alpha) {
        if (m >= ua.alpha) {
            ++ua.count;
        }
    }

    if (state.sum_wm <= 0.0) {
        return;
    }
    const double v2 = state.sum_wm * lower_prev;
    const double eps = confidence_radius(state.r_max, v2, state.delta) / state.sum_wm;
    const double est = state.sum_wx / state.sum_wm;
    state.lower_recip = std::min(lower_prev, est + eps);
    state.upper_recip = std::max(state.upper_recip, est - eps);
    if (state.upper_recip > state.lower_recip) {
        state.upper_recip = state.lower_recip;
        state.collapsed = true;
    }
}

EstimatorState update(EstimatorState state, double m, bool x) {
    apply_update(state, m, x);
    return state;
}

}  // namespace alloc_bandit
