// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "alloc_bandit/allocator.hpp"
#include "alloc_bandit/harness.hpp"
#include "alloc_bandit/init.hpp"
#include "alloc_bandit/io.hpp"
#include "process_util.hpp"

namespace ab = alloc_bandit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), f, a);
    return buf;
}

Outcome oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    ab::RandomStream rng(1001);
    const double step = 0.005;
    std::size_t failures = 0;
    double worst_slack = 0.0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t k = 1 + static_cast<std::size_t>(rng.next_u64() % 3);
        std::vector<double> nus(k);
        double nu_min = 1.0;
        for (auto& v : nus) {
            v = 0.05 + 4.95 * rng.uniform();
            nu_min = std::min(nu_min, v);
        }
        const auto inst = ab::make_instance(nus, 1);
        const double closed = ab::optimal_profile(inst).rho_star;
        const double brute = ab::brute_force_optimal(inst, step).reward;
        const double bound = static_cast<double>(k) * step / nu_min;
        const double diff = closed - brute;
        if (diff < -1e-9 || diff > bound + 1e-12) {
            ++failures;
        }
        worst_slack = std::max(worst_slack, std::abs(diff) / bound);
    }
    const double secs = seconds_since(start);
    return {failures == 0 && secs < 60.0, std::to_string(failures) + " mismatches, worst |diff|/bound " +
                                              fmt("%.3f", worst_slack) + ", " + fmt("%.1f s", secs)};
}

// Per-step record for one coverage run.
struct CoverageRun {
    bool covered = true;
    std::size_t invariant_violations = 0;
};

CoverageRun coverage_episode(double delta, std::uint64_t seed) {
    const double nu = 0.7;
    const double lb0 = 0.3;
    const std::uint64_t n = 500;
    const double r = 1.0 / nu;
    const double eta = std::min(1.0, nu) / lb0;
    const double delta_tilde = delta / (48.0 * std::pow(eta, 4) * std::pow(static_cast<double>(n), 6));
    const double c1 = 27.0 * std::log(2.0 / delta_tilde);
    const double c2 = 6.0 * std::log(2.0 / delta_tilde);
    constexpr double tol = 1e-9;

    auto inst = ab::make_instance(std::vector<double>{nu}, n, seed);
    ab::PolicyOptions opt;
    opt.seed = seed;
    opt.delta_override = delta;
    opt.alphas = {0.1, 0.3};
    const std::vector<double> lb{lb0};

    CoverageRun out;
    ab::EstimatorState prev = ab::make_estimator(lb0, delta, ab::EstimatorMode::Weighted, opt.alphas);
    std::vector<ab::EstimatorState> states;
    std::vector<double> ms;
    states.reserve(n);
    ms.reserve(n);
    ab::run_episode_summary(inst, lb, opt, [&](const ab::StepView& v) {
        const auto& s = *v.estimators[0];
        if (s.lower_recip < r || s.upper_recip > r) {
            out.covered = false;
        }
        ms.push_back(v.allocation[0]);
        states.push_back(s);
    });
    if (!out.covered) {
        return out;
    }
    for (std::size_t i = 0; i < states.size(); ++i) {
        const auto& s = states[i];
        const double t = static_cast<double>(i + 1);
        const double m = ms[i];
        const double eps_prev = ab::width(prev);
        const double eps = ab::width(s);
        const double w = 1.0 / (1.0 - m * prev.upper_recip);
        const double lower_nu = 1.0 / s.lower_recip;
        bool ok = true;
        // w M <= 1/eps_{t-1}, with equality at full allocation.
        ok &= w * m <= (1.0 / eps_prev) * (1 + tol);
        if (std::abs(m - 1.0 / prev.lower_recip) <= 1e-12 / prev.lower_recip) {
            ok &= std::abs(w * m - 1.0 / eps_prev) <= tol / eps_prev;
        }
        // (2)
        ok &= s.r_max >= 1.0 && s.r_max <= (1.0 / (lb0 * eps_prev)) * (1 + tol);
        // (3)
        ok &= eps >= (1.0 / (t * std::min(1.0, nu))) * (1 - tol);
        // (4)
        ok &= 1.0 - lower_nu / nu <= lower_nu * eps * (1 + tol) + tol;
        // Fast and slow width rates.
        ok &= eps <= c1 / (lb0 * (static_cast<double>(s.fully_allocated) + 1.0)) * (1 + tol);
        for (const auto& ua : s.u_alpha) {
            if (ua.count >= 1) {
                ok &= eps <= std::sqrt(c2 / (ua.alpha * lb0 * static_cast<double>(ua.count))) * (1 + tol);
            }
        }
        if (!ok) {
            ++out.invariant_violations;
        }
        prev = s;
    }
    return out;
}

struct CoverageSummary {
    Outcome coverage;
    Outcome invariants;
};

CoverageSummary coverage_and_invariants() {
    const auto start = std::chrono::steady_clock::now();
    const std::size_t reps = 2000;
    const double n = 500;
    bool coverage_ok = true;
    std::size_t valid_runs = 0;
    std::size_t violations = 0;
    std::string detail;
    for (double delta : {0.01, 1e-4}) {
        std::size_t exits = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
            const auto run = coverage_episode(delta, ab::derive_seed(delta == 0.01 ? 2001 : 2002, rep));
            if (!run.covered) {
                ++exits;
            } else {
                ++valid_runs;
                violations += run.invariant_violations;
            }
        }
        const double freq = static_cast<double>(exits) / reps;
        const double bound = n * delta + 3.0 * std::sqrt(n * delta / reps);
        coverage_ok &= freq <= bound;
        detail += "delta=" + ab::format_double(delta) + ": exit freq " + ab::format_double(freq) + " (bound " +
                  fmt("%.4f", bound) + "); ";
    }
    const double secs = seconds_since(start);
    detail += fmt("%.1f s", secs);
    return {{coverage_ok && secs < 120.0, detail},
            {violations == 0 && valid_runs > 0,
             std::to_string(violations) + " step violations over " + std::to_string(valid_runs) +
                 " coverage-valid runs"}};
}

ab::ExperimentConfig config(const std::string& id, std::vector<double> nus, std::uint64_t horizon,
                            std::string sweep, std::vector<double> values, std::uint64_t seed,
                            std::vector<ab::ArmSpec> arms = {ab::ArmSpec{}}) {
    ab::ExperimentConfig c;
    c.id = id;
    for (double v : nus) {
        c.nus.push_back(ab::Difficulty::of(v));
    }
    c.horizon = horizon;
    c.sweep_parameter = std::move(sweep);
    c.sweep_values = std::move(values);
    c.replications = 100;
    c.base_seed = seed;
    c.arms = std::move(arms);
    c.validate();
    return c;
}

Outcome tr_reproduction() {
    const auto start = std::chrono::steady_clock::now();
    const auto result = ab::run_experiment(config("TR", {0.4, 0.6}, 10000, "horizon", {1e4, 1e5}, 4001));
    std::vector<double> scaled;
    for (const auto& p : result.points) {
        const double l = std::log(p.grid_value);
        scaled.push_back(p.mean_regret / (l * l));
    }
    const double hi = std::max(scaled[0], scaled[1]);
    const double lo = std::min(scaled[0], scaled[1]);
    const double variation = (hi - lo) / lo;
    const double secs = seconds_since(start);
    const bool pass = lo >= 15.0 && hi <= 90.0 && variation < 0.35 && secs < 600.0;
    return {pass, "R/log^2 n = " + fmt("%.2f", scaled[0]) + " (n=1e4), " + fmt("%.2f", scaled[1]) +
                      " (n=1e5); variation " + fmt("%.1f%%", 100 * variation) + ", " + fmt("%.1f s", secs)};
}

Outcome bl_critical_point() {
    const auto result = ab::run_experiment(config("BL", {0.4, 0.55}, 100000, "nu2", {0.55, 0.95}, 5001));
    const auto* low = result.find(0.55, "weighted");
    const auto* high = result.find(0.95, "weighted");
    const auto ci_low = ab::bootstrap_mean_ci(low->samples);
    const auto ci_high = ab::bootstrap_mean_ci(high->samples);
    const bool pass = high->mean_regret < low->mean_regret && ci_high.hi < ci_low.lo;
    return {pass, "nu2=0.55: " + fmt("%.1f", low->mean_regret) + " [" + fmt("%.1f", ci_low.lo) + ", " +
                      fmt("%.1f", ci_low.hi) + "]; nu2=0.95: " + fmt("%.1f", high->mean_regret) + " [" +
                      fmt("%.1f", ci_high.lo) + ", " + fmt("%.1f", ci_high.hi) + "]"};
}

Outcome br_weighted_vs_unweighted() {
    const auto result = ab::run_experiment(config("BR", {0.4, 0.6}, 100000, "horizon", {1e5}, 6001,
                                                  {{"weighted", ab::EstimatorMode::Weighted},
                                                   {"unweighted", ab::EstimatorMode::Unweighted}}));
    const auto* w = result.find(1e5, "weighted");
    const auto* u = result.find(1e5, "unweighted");
    const auto ci_w = ab::bootstrap_mean_ci(w->samples);
    const auto ci_u = ab::bootstrap_mean_ci(u->samples);
    const bool pass = w->mean_regret <= 0.8 * u->mean_regret && ci_w.hi < ci_u.lo;
    return {pass, "weighted " + fmt("%.1f", w->mean_regret) + " [" + fmt("%.1f", ci_w.lo) + ", " +
                      fmt("%.1f", ci_w.hi) + "], unweighted " + fmt("%.1f", u->mean_regret) + " [" +
                      fmt("%.1f", ci_u.lo) + ", " + fmt("%.1f", ci_u.hi) + "], ratio " +
                      fmt("%.3f", w->mean_regret / u->mean_regret)};
}

Outcome tl_gap_dependence() {
    const auto result = ab::run_experiment(config("TL", {2.0, 3.0}, 10000, "nu2", {3.0, 10.0}, 7001));
    const double r3 = result.find(3.0, "weighted")->mean_regret;
    const double r10 = result.find(10.0, "weighted")->mean_regret;
    return {r10 < r3, "nu2=3: " + fmt("%.2f", r3) + ", nu2=10: " + fmt("%.2f", r10)};
}

Outcome halving_expectation() {
    bool pass = true;
    std::string detail;
    std::uint64_t seed = 8001;
    for (double nu : {0.05, 0.1, 0.3, 0.7, 1.5, 5.0}) {
        const auto s = ab::halving_statistics(ab::Difficulty::of(nu), 100000, seed++);
        pass &= s.mean_eta <= 4.0 + 3.0 * s.stderr_eta && s.bound_violations == 0;
        detail += ab::format_double(nu) + ":" + fmt("%.3f", s.mean_eta) + " ";
    }
    return {pass, "mean eta " + detail};
}

Outcome minimax_consistency() {
    const auto a = ab::minimax_stress(1000, 2, 100, 9001);
    const auto b = ab::minimax_stress(10000, 2, 100, 9002);
    const double factor = std::max(a.ratio, b.ratio) / std::min(a.ratio, b.ratio);
    const bool pass = a.sup_regret >= a.lower_bound && b.sup_regret >= b.lower_bound && factor <= 4.0;
    return {pass, "n=1e3 sup " + fmt("%.2f", a.sup_regret) + " (lb " + fmt("%.2f", a.lower_bound) + "), n=1e4 sup " +
                      fmt("%.2f", b.sup_regret) + " (lb " + fmt("%.2f", b.lower_bound) + "), ratio factor " +
                      fmt("%.2f", factor)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome cli_determinism() {
    const fs::path dir = fs::temp_directory_path() / "alloc_bandit_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "exp.json") << R"({"id": "det", "nus": [0.4, 0.6], "horizon": 2000, "replications": 8,
        "seed": 3, "sweep": {"parameter": "nu2", "values": [0.6, 0.8]}, "arms": ["weighted", "unweighted"]})";
    const std::string cli = ALLOC_BANDIT_CLI;
    const std::vector<std::string> invocations{
        "run --nus 0.4,0.6 --horizon 2000 --seed 7 --lower-bounds 0.2,0.3 --snapshot-intervals --out",
        "run --nus 0.4,0.9,2 --horizon 2000 --seed 7 --mode unweighted --out",
        "experiment --config " + (dir / "exp.json").string() + " --out",
        "minimax --horizon 1000 --k 2 --reps 10 --seed 1 --out",
        "init-stats --reps 5000 --seed 2 --out",
    };
    std::size_t mismatches = 0;
    std::size_t failures = 0;
    for (std::size_t i = 0; i < invocations.size(); ++i) {
        std::vector<std::string> outputs;
        for (const char* threads : {"1", "1", "4"}) {
            const fs::path out = dir / ("out_" + std::to_string(i) + "_" + std::to_string(outputs.size()) + ".csv");
            const auto r = test_util::run_command(std::string("ALLOC_BANDIT_THREADS=") + threads + " " + cli + " " +
                                                  invocations[i] + " " + out.string());
            failures += r.exit_code != 0;
            outputs.push_back(slurp(out));
        }
        mismatches += outputs[0] != outputs[1] || outputs[0] != outputs[2] || outputs[0].empty();
    }
    fs::remove_all(dir);
    return {mismatches == 0 && failures == 0, std::to_string(invocations.size()) + " invocations, " +
                                                  std::to_string(mismatches) + " mismatching, " +
                                                  std::to_string(failures) + " failed"};
}

}  // namespace

int main() {
    int failed = 0;
    auto report = [&](int id, const char* name, const Outcome& o) {
        std::printf("criterion %2d %-28s %s  %s\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    };
    report(1, "oracle-equivalence", oracle_equivalence());
    const auto cov = coverage_and_invariants();
    report(2, "confidence-coverage", cov.coverage);
    report(3, "width-rate-invariants", cov.invariants);
    report(4, "tr-log-squared-growth", tr_reproduction());
    report(5, "bl-critical-point", bl_critical_point());
    report(6, "br-weighted-vs-unweighted", br_weighted_vs_unweighted());
    report(7, "tl-gap-dependence", tl_gap_dependence());
    report(8, "halving-mean-eta", halving_expectation());
    report(9, "minimax-consistency", minimax_consistency());
    report(10, "cli-determinism", cli_determinism());
    std::printf("%d of 10 criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
