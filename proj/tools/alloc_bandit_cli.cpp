// Command-line front end: single runs, experiment sweeps, the minimax
// stress test and halving-initializer statistics.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "alloc_bandit/allocator.hpp"
#include "alloc_bandit/errors.hpp"
#include "alloc_bandit/harness.hpp"
#include "alloc_bandit/init.hpp"
#include "alloc_bandit/io.hpp"

namespace ab = alloc_bandit;

namespace {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double parse_number(const std::string& flag, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) {
            throw std::invalid_argument(text);
        }
        return v;
    } catch (const std::exception&) {
        throw UsageError(flag + ": cannot parse '" + text + "' as a number");
    }
}

std::vector<double> parse_list(const std::string& flag, const std::vector<std::string>& items) {
    std::vector<double> out;
    out.reserve(items.size());
    for (const auto& s : items) {
        out.push_back(parse_number(flag, s));
    }
    return out;
}

std::vector<ab::Difficulty> parse_difficulties(const std::string& flag, const std::vector<std::string>& items) {
    std::vector<ab::Difficulty> out;
    for (const auto& s : items) {
        if (s == "null" || s == "inf" || s == "unbounded") {
            out.push_back(ab::Difficulty::unbounded());
            continue;
        }
        const double v = parse_number(flag, s);
        if (!(v > 0.0)) {
            throw UsageError(flag + ": difficulties must be positive, got '" + s + "'");
        }
        out.push_back(ab::Difficulty::of(v));
    }
    return out;
}

ab::EstimatorMode parse_mode(const std::string& s) {
    return s == "unweighted" ? ab::EstimatorMode::Unweighted : ab::EstimatorMode::Weighted;
}

struct RunArgs {
    std::string config;
    std::vector<std::string> nus;
    std::uint64_t horizon = 1000;
    std::uint64_t seed = 0;
    std::string mode = "weighted";
    std::vector<std::string> lower_bounds;
    std::optional<double> delta;
    std::string out;
    bool snapshot_intervals = false;
};

int cmd_run(const RunArgs& a, bool horizon_given, bool seed_given) {
    ab::ProblemInstance instance;
    std::optional<std::vector<double>> lower_bounds;
    if (!a.config.empty()) {
        const auto j = nlohmann::json::parse(ab::read_file(a.config));
        instance = ab::instance_from_json(j);
        if (j.contains("lower_bounds") && !j.at("lower_bounds").is_null()) {
            lower_bounds = j.at("lower_bounds").get<std::vector<double>>();
        }
    } else {
        if (a.nus.empty()) {
            throw UsageError("run: one of --nus or --config is required");
        }
        instance.nus = parse_difficulties("--nus", a.nus);
    }
    if (horizon_given || a.config.empty()) {
        instance.horizon = a.horizon;
    }
    if (seed_given || a.config.empty()) {
        instance.base_seed = a.seed;
    }
    if (!a.lower_bounds.empty()) {
        lower_bounds = parse_list("--lower-bounds", a.lower_bounds);
        if (lower_bounds->size() != instance.num_jobs()) {
            throw UsageError("--lower-bounds: expected " + std::to_string(instance.num_jobs()) + " values");
        }
    }
    instance.validate();

    ab::PolicyOptions options;
    options.estimator_mode = parse_mode(a.mode);
    options.delta_override = a.delta;
    options.record_intervals = a.snapshot_intervals;
    options.seed = instance.base_seed;

    const ab::RunTrace trace =
        lower_bounds ? ab::run_episode(instance, *lower_bounds, options) : ab::run_modified(instance, options);

    if (!a.out.empty()) {
        ab::write_file_atomic(a.out, ab::format_trace_csv(trace));
        ab::write_file_atomic(a.out + ".meta.json", ab::trace_metadata_to_json(trace).dump(2) + "\n");
    }
    std::printf("run: K=%zu n=%llu algorithm=%s mode=%s cumulative_regret=%.6f\n", instance.num_jobs(),
                static_cast<unsigned long long>(instance.horizon), lower_bounds ? "plain" : "self-initializing",
                a.mode.c_str(), trace.total_regret());
    return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& out, std::optional<std::size_t> reps,
                   std::optional<std::uint64_t> seed) {
    ab::ExperimentConfig config = ab::load_experiment_config(config_path);
    if (reps) {
        config.replications = *reps;
    }
    if (seed) {
        config.base_seed = *seed;
    }
    if (!out.empty()) {
        config.output = out;
    }
    config.validate();
    const ab::ExperimentResult result = ab::run_experiment(config);
    if (!config.output.empty()) {
        ab::emit_csv(result, config.output);
    }
    const auto& last = result.points.back();
    std::printf("experiment %s: %zu points x %zu arms, %zu reps; final mean regret %.6f (%s, %s=%s)\n",
                config.id.c_str(), config.sweep_values.size(), config.arms.size(), config.replications,
                last.mean_regret, last.arm.c_str(), config.sweep_parameter.c_str(),
                ab::format_double(last.grid_value).c_str());
    return 0;
}

int cmd_minimax(std::uint64_t horizon, std::size_t k, std::size_t reps, std::uint64_t seed, const std::string& mode,
                const std::string& out) {
    const auto result = ab::minimax_stress(horizon, k, reps, seed, parse_mode(mode));
    if (!out.empty()) {
        const auto family = ab::minimax_family(horizon, k);
        std::string csv = "instance,nu_hard,mean_regret,stderr,reps\n";
        for (std::size_t i = 0; i < k; ++i) {
            csv += std::to_string(i + 1) + "," + ab::format_double(family[i].nus[i].nu()) + "," +
                   ab::format_double(result.mean_regret[i]) + "," + ab::format_double(result.stderr_regret[i]) +
                   "," + std::to_string(reps) + "\n";
        }
        ab::write_file_atomic(out, csv);
    }
    std::printf("minimax: n=%llu K=%zu reps=%zu sup_regret=%.6f ratio_to_sqrt_nK=%.6f lower_bound=%.6f\n",
                static_cast<unsigned long long>(horizon), k, reps, result.sup_regret, result.ratio,
                result.lower_bound);
    return 0;
}

int cmd_init_stats(const std::vector<std::string>& nus_text, std::size_t reps, std::uint64_t seed,
                   const std::string& out) {
    const auto nus = parse_difficulties("--nus", nus_text);
    std::string csv = "nu,mean_eta,stderr_eta,mean_steps,reps,cap_hits\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < nus.size(); ++i) {
        const auto stats = ab::halving_statistics(nus[i], reps, ab::derive_seed(seed, i));
        worst = std::max(worst, stats.mean_eta);
        csv += (nus[i].is_unbounded() ? std::string("inf") : ab::format_double(nus[i].nu())) + "," +
               ab::format_double(stats.mean_eta) + "," + ab::format_double(stats.stderr_eta) + "," +
               ab::format_double(stats.mean_steps) + "," + std::to_string(stats.replications) + "," +
               std::to_string(stats.cap_hits) + "\n";
    }
    if (!out.empty()) {
        ab::write_file_atomic(out, csv);
    }
    std::printf("init-stats: %zu difficulties, %zu reps each; max mean eta %.6f\n", nus.size(), reps, worst);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimistic allocation of a replenished unit budget across stochastic jobs"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run one episode and write its trace");
    auto* run_config = run_cmd->add_option("--config", run.config, "Instance JSON {nus, horizon, seed}");
    auto* run_nus = run_cmd->add_option("--nus", run.nus, "Job difficulties, comma separated")->delimiter(',');
    run_config->excludes(run_nus);
    auto* run_horizon = run_cmd->add_option("--horizon", run.horizon, "Number of steps");
    auto* run_seed = run_cmd->add_option("--seed", run.seed, "Random seed");
    run_cmd->add_option("--mode", run.mode, "Estimator mode")->check(CLI::IsMember({"weighted", "unweighted"}));
    run_cmd->add_option("--lower-bounds", run.lower_bounds, "Known initial lower bounds; omit to self-initialize")
        ->delimiter(',');
    run_cmd->add_option("--delta", run.delta, "Confidence parameter override");
    run_cmd->add_option("--out", run.out, "Trace CSV path (metadata goes to <out>.meta.json)");
    run_cmd->add_flag("--snapshot-intervals", run.snapshot_intervals, "Record per-step confidence bounds");

    std::string exp_config;
    std::string exp_out;
    std::optional<std::size_t> exp_reps;
    std::optional<std::uint64_t> exp_seed;
    auto* exp_cmd = app.add_subcommand("experiment", "Run a declarative Monte-Carlo sweep");
    exp_cmd->add_option("--config", exp_config, "Experiment JSON")->required();
    exp_cmd->add_option("--out", exp_out, "Result CSV path (overrides config)");
    exp_cmd->add_option("--reps", exp_reps, "Replications per grid point (overrides config)");
    exp_cmd->add_option("--seed", exp_seed, "Base seed (overrides config)");

    std::uint64_t mm_horizon = 1000;
    std::size_t mm_k = 2;
    std::size_t mm_reps = 100;
    std::uint64_t mm_seed = 0;
    std::string mm_mode = "weighted";
    std::string mm_out;
    auto* mm_cmd = app.add_subcommand("minimax", "Stress test on the adversarial instance family");
    mm_cmd->add_option("--horizon", mm_horizon, "Number of steps");
    mm_cmd->add_option("--k", mm_k, "Number of jobs");
    mm_cmd->add_option("--reps", mm_reps, "Replications per instance");
    mm_cmd->add_option("--seed", mm_seed, "Base seed");
    mm_cmd->add_option("--mode", mm_mode, "Estimator mode")->check(CLI::IsMember({"weighted", "unweighted"}));
    mm_cmd->add_option("--out", mm_out, "Per-instance CSV path");

    std::vector<std::string> is_nus{"0.05", "0.1", "0.3", "0.7", "1.5", "5"};
    std::size_t is_reps = 100000;
    std::uint64_t is_seed = 0;
    std::string is_out;
    auto* is_cmd = app.add_subcommand("init-stats", "Statistics of the halving initializer");
    is_cmd->add_option("--nus", is_nus, "Difficulties, comma separated")->delimiter(',');
    is_cmd->add_option("--reps", is_reps, "Replications per difficulty");
    is_cmd->add_option("--seed", is_seed, "Base seed");
    is_cmd->add_option("--out", is_out, "CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run_cmd) {
            return cmd_run(run, run_horizon->count() > 0, run_seed->count() > 0);
        }
        if (*exp_cmd) {
            return cmd_experiment(exp_config, exp_out, exp_reps, exp_seed);
        }
        if (*mm_cmd) {
            return cmd_minimax(mm_horizon, mm_k, mm_reps, mm_seed, mm_mode, mm_out);
        }
        if (*is_cmd) {
            return cmd_init_stats(is_nus, is_reps, is_seed, is_out);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
