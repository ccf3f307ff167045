#include "alloc_bandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "alloc_bandit/allocator.hpp"
#include "alloc_bandit/errors.hpp"
#include "alloc_bandit/init.hpp"
#include "alloc_bandit/io.hpp"
#include "alloc_bandit/random.hpp"

namespace alloc_bandit {

using nlohmann::json;

namespace {

std::optional<std::size_t> swept_job(const std::string& parameter) {
    if (parameter.size() > 2 && parameter.rfind("nu", 0) == 0) {
        const std::size_t idx = std::stoul(parameter.substr(2));
        require(idx >= 1, "nu<k> sweep uses 1-based job indices");
        return idx - 1;
    }
    return std::nullopt;
}

EstimatorMode parse_mode(const std::string& s) {
    if (s == "weighted") {
        return EstimatorMode::Weighted;
    }
    if (s == "unweighted") {
        return EstimatorMode::Unweighted;
    }
    throw ContractViolation("unknown estimator mode '" + s + "' (expected weighted|unweighted)");
}

}  // namespace

void ExperimentConfig::validate() const {
    require(!nus.empty(), "experiment needs at least one job");
    require(!sweep_values.empty(), "experiment grid must be non-empty");
    require(replications >= 1, "replications must be >= 1");
    require(!arms.empty(), "experiment needs at least one arm");
    require(horizon >= 1, "horizon must be >= 1");
    if (lower_bounds) {
        require(lower_bounds->size() == nus.size(), "lower_bounds must have one entry per job");
    }
    if (delta) {
        require(*delta > 0.0 && *delta < 1.0, "delta must lie in (0, 1)");
    }
    if (sweep_parameter != "horizon") {
        const auto job = swept_job(sweep_parameter);
        require(job.has_value(), "sweep parameter must be 'horizon' or 'nu<k>', got '" + sweep_parameter + "'");
        require(*job < nus.size(), "swept job index exceeds K");
    }
}

ProblemInstance ExperimentConfig::instance_at(double grid_value) const {
    ProblemInstance inst;
    inst.nus = nus;
    inst.horizon = horizon;
    inst.base_seed = base_seed;
    if (sweep_parameter == "horizon") {
        require(grid_value >= 1.0, "horizon grid values must be >= 1");
        inst.horizon = static_cast<std::uint64_t>(std::llround(grid_value));
    } else {
        inst.nus[*swept_job(sweep_parameter)] = Difficulty::of(grid_value);
    }
    inst.validate();
    return inst;
}

ExperimentConfig experiment_config_from_json(const json& j) {
    require(j.is_object(), "experiment config must be a JSON object");
    ExperimentConfig c;
    c.id = j.value("id", c.id);
    require(j.contains("nus"), "experiment config needs \"nus\"");
    for (const auto& v : j.at("nus")) {
        c.nus.push_back(v.is_null() ? Difficulty::unbounded() : Difficulty::of(v.get<double>()));
    }
    if (j.contains("lower_bounds") && !j.at("lower_bounds").is_null()) {
        c.lower_bounds = j.at("lower_bounds").get<std::vector<double>>();
    }
    c.horizon = j.value("horizon", c.horizon);
    c.replications = j.value("replications", c.replications);
    c.base_seed = j.value("seed", c.base_seed);
    if (j.contains("delta") && !j.at("delta").is_null()) {
        c.delta = j.at("delta").get<double>();
    }
    c.output = j.value("output", c.output);

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        c.sweep_parameter = s.value("parameter", c.sweep_parameter);
        if (s.contains("values")) {
            c.sweep_values = s.at("values").get<std::vector<double>>();
        } else {
            const double from = s.at("from").get<double>();
            const double to = s.at("to").get<double>();
            const auto points = s.at("points").get<std::size_t>();
            require(points >= 1, "sweep needs at least one point");
            for (std::size_t i = 0; i < points; ++i) {
                const double frac = points == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(points - 1);
                c.sweep_values.push_back(from + frac * (to - from));
            }
        }
    } else {
        c.sweep_parameter = "horizon";
        c.sweep_values = {static_cast<double>(c.horizon)};
    }

    if (j.contains("arms")) {
        c.arms.clear();
        for (const auto& a : j.at("arms")) {
            if (a.is_string()) {
                const auto mode = a.get<std::string>();
                c.arms.push_back({mode, parse_mode(mode)});
            } else {
                const auto mode = a.value("mode", std::string("weighted"));
                c.arms.push_back({a.value("name", mode), parse_mode(mode)});
            }
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
    return experiment_config_from_json(j);
}

const GridPointResult* ExperimentResult::find(double grid_value, const std::string& arm) const {
    for (const auto& p : points) {
        if (p.grid_value == grid_value && p.arm == arm) {
            return &p;
        }
    }
    return nullptr;
}

MeanStderr mean_and_stderr(std::span<const double> samples) {
    MeanStderr out;
    if (samples.empty()) {
        return out;
    }
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double sum = 0.0;
    for (double v : sorted) {
        sum += v;
    }
    out.mean = sum / n;
    if (sorted.size() > 1) {
        double ss = 0.0;
        for (double v : sorted) {
            ss += (v - out.mean) * (v - out.mean);
        }
        out.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    }
    return out;
}

Interval bootstrap_mean_ci(std::span<const double> samples, double level, std::size_t resamples,
                           std::uint64_t seed) {
    require(!samples.empty(), "bootstrap needs samples");
    require(level > 0.0 && level < 1.0, "confidence level must lie in (0, 1)");
    require(resamples >= 10, "bootstrap needs at least 10 resamples");
    RandomStream rng(seed);
    const std::size_t n = samples.size();
    std::vector<double> means(resamples);
    for (std::size_t b = 0; b < resamples; ++b) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto idx = static_cast<std::size_t>(rng.uniform() * static_cast<double>(n));
            sum += samples[std::min(idx, n - 1)];
        }
        means[b] = sum / static_cast<double>(n);
    }
    std::sort(means.begin(), means.end());
    const double tail = (1.0 - level) / 2.0;
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(resamples - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, resamples - 1);
        const double frac = pos - static_cast<double>(lo);
        return means[lo] * (1.0 - frac) + means[hi] * frac;
    };
    return {quantile(tail), quantile(1.0 - tail)};
}

std::size_t resolve_thread_count(std::size_t requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char* env = std::getenv("ALLOC_BANDIT_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return v;
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task) {
    const std::size_t workers = std::min(count, resolve_thread_count(threads));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    task(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next.store(count);
                }
            }
        });
    }
    for (auto& th : pool) {
        th.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

double episode_regret(const ProblemInstance& instance, const std::optional<std::vector<double>>& lower_bounds,
                      EstimatorMode mode, std::optional<double> delta, std::uint64_t seed) {
    PolicyOptions options;
    options.estimator_mode = mode;
    options.delta_override = delta;
    options.seed = seed;
    if (lower_bounds) {
        return run_episode_summary(instance, *lower_bounds, options).cumulative_regret;
    }
    return run_modified_summary(instance, options).episode.cumulative_regret;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t threads) {
    config.validate();
    const std::size_t points = config.sweep_values.size();
    const std::size_t arms = config.arms.size();
    const std::size_t reps = config.replications;

    std::vector<ProblemInstance> instances;
    instances.reserve(points);
    for (double v : config.sweep_values) {
        instances.push_back(config.instance_at(v));
    }

    // One sample slot per (point, arm, replication). Replication r uses the
    // same seed at every point and arm, so arms see common random numbers
    // and adding grid points never shifts existing ones.
    std::vector<double> samples(points * arms * reps, 0.0);
    parallel_for(samples.size(), threads, [&](std::size_t task) {
        const std::size_t rep = task % reps;
        const std::size_t arm = (task / reps) % arms;
        const std::size_t point = task / (reps * arms);
        samples[task] = episode_regret(instances[point], config.lower_bounds, config.arms[arm].mode, config.delta,
                                       derive_seed(config.base_seed, rep));
    });

    ExperimentResult result;
    result.id = config.id;
    for (std::size_t p = 0; p < points; ++p) {
        for (std::size_t a = 0; a < arms; ++a) {
            GridPointResult gp;
            gp.grid_value = config.sweep_values[p];
            gp.arm = config.arms[a].name;
            gp.replications = reps;
            const auto begin = samples.begin() + static_cast<std::ptrdiff_t>((p * arms + a) * reps);
            gp.samples.assign(begin, begin + static_cast<std::ptrdiff_t>(reps));
            const auto stats = mean_and_stderr(gp.samples);
            gp.mean_regret = stats.mean;
            gp.stderr_regret = stats.std_error;
            result.points.push_back(std::move(gp));
        }
    }
    return result;
}

std::string format_experiment_csv(const ExperimentResult& result) {
    std::string out = "grid_value,arm,mean_regret,stderr,reps\n";
    for (const auto& p : result.points) {
        out += format_double(p.grid_value);
        out += ',';
        out += p.arm;
        out += ',';
        out += format_double(p.mean_regret);
        out += ',';
        out += format_double(p.stderr_regret);
        out += ',';
        out += std::to_string(p.replications);
        out += '\n';
    }
    return out;
}

void emit_csv(const ExperimentResult& result, const std::filesystem::path& path) {
    write_file_atomic(path, format_experiment_csv(result));
}

std::vector<ProblemInstance> minimax_family(std::uint64_t horizon, std::size_t num_jobs) {
    require(num_jobs >= 2, "minimax family needs K >= 2");
    require(8 * horizon >= num_jobs, "minimax family needs 8n >= K");
    const double eps = std::sqrt(static_cast<double>(num_jobs) / (8.0 * static_cast<double>(horizon)));
    std::vector<ProblemInstance> family;
    family.reserve(num_jobs);
    for (std::size_t k = 0; k < num_jobs; ++k) {
        ProblemInstance inst;
        inst.nus.assign(num_jobs, Difficulty::of(2.0));
        inst.nus[k] = Difficulty::of(2.0 / (1.0 + eps));
        inst.horizon = horizon;
        family.push_back(std::move(inst));
    }
    return family;
}

MinimaxResult minimax_stress(std::uint64_t horizon, std::size_t num_jobs, std::size_t replications,
                             std::uint64_t seed, EstimatorMode mode, std::size_t threads) {
    require(replications >= 1, "replications must be >= 1");
    const auto family = minimax_family(horizon, num_jobs);
    std::vector<double> samples(num_jobs * replications, 0.0);
    parallel_for(samples.size(), threads, [&](std::size_t task) {
        const std::size_t k = task / replications;
        const std::size_t rep = task % replications;
        samples[task] = episode_regret(family[k], std::nullopt, mode, std::nullopt, derive_seed(seed, rep));
    });

    MinimaxResult out;
    out.replications = replications;
    for (std::size_t k = 0; k < num_jobs; ++k) {
        const auto stats = mean_and_stderr(
            std::span<const double>(samples).subspan(k * replications, replications));
        out.mean_regret.push_back(stats.mean);
        out.stderr_regret.push_back(stats.std_error);
    }
    out.sup_regret = *std::max_element(out.mean_regret.begin(), out.mean_regret.end());
    const double scale = std::sqrt(static_cast<double>(horizon) * static_cast<double>(num_jobs));
    out.ratio = out.sup_regret / scale;
    out.lower_bound = scale / (16.0 * std::sqrt(2.0));
    return out;
}

}  // namespace alloc_bandit
