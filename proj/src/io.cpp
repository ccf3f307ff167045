#include "alloc_bandit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "alloc_bandit/errors.hpp"

namespace alloc_bandit {

using nlohmann::json;

std::string format_double(double value) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw std::runtime_error("failed to format double");
    }
    return std::string(buf, end);
}

json instance_to_json(const ProblemInstance& instance) {
    json nus = json::array();
    for (const auto& nu : instance.nus) {
        if (nu.is_unbounded()) {
            nus.push_back(nullptr);
        } else {
            nus.push_back(nu.nu());
        }
    }
    return json{{"nus", nus}, {"horizon", instance.horizon}, {"seed", instance.base_seed}};
}

ProblemInstance instance_from_json(const json& j) {
    require(j.is_object() && j.contains("nus") && j.at("nus").is_array(), "instance JSON needs a \"nus\" array");
    ProblemInstance inst;
    for (const auto& v : j.at("nus")) {
        inst.nus.push_back(v.is_null() ? Difficulty::unbounded() : Difficulty::of(v.get<double>()));
    }
    inst.horizon = j.value("horizon", std::uint64_t{1});
    inst.base_seed = j.value("seed", std::uint64_t{0});
    inst.validate();
    return inst;
}

json estimator_to_json(const EstimatorState& s) {
    json ua = json::object();
    for (const auto& a : s.u_alpha) {
        ua[format_double(a.alpha)] = a.count;
    }
    return json{{"L", s.lower_recip},
                {"U", s.upper_recip},
                {"sum_wx", s.sum_wx},
                {"sum_wm", s.sum_wm},
                {"r_max", s.r_max},
                {"t", s.t},
                {"delta", s.delta},
                {"T", s.fully_allocated},
                {"u_alpha", ua},
                {"mode", s.mode == EstimatorMode::Weighted ? "weighted" : "unweighted"},
                {"weight_capped", s.weight_capped},
                {"collapsed", s.collapsed}};
}

EstimatorState estimator_from_json(const json& j) {
    EstimatorState s;
    s.lower_recip = j.at("L").get<double>();
    s.upper_recip = j.at("U").get<double>();
    s.sum_wx = j.at("sum_wx").get<double>();
    s.sum_wm = j.at("sum_wm").get<double>();
    s.r_max = j.at("r_max").get<double>();
    s.t = j.at("t").get<std::uint64_t>();
    s.delta = j.at("delta").get<double>();
    s.fully_allocated = j.at("T").get<std::uint64_t>();
    if (j.contains("u_alpha")) {
        for (const auto& [key, count] : j.at("u_alpha").items()) {
            s.u_alpha.push_back({std::stod(key), count.get<std::uint64_t>()});
        }
        // Object keys come back sorted as strings; restore numeric order.
        std::sort(s.u_alpha.begin(), s.u_alpha.end(),
                  [](const AlphaCount& a, const AlphaCount& b) { return a.alpha < b.alpha; });
    }
    s.mode = j.value("mode", std::string("weighted")) == "unweighted" ? EstimatorMode::Unweighted
                                                                       : EstimatorMode::Weighted;
    s.weight_capped = j.value("weight_capped", false);
    s.collapsed = j.value("collapsed", false);
    return s;
}

json init_record_to_json(const InitRecord& r) {
    return json{{"job", r.job + 1},
                {"start_step", r.start_step},
                {"steps_used", r.steps_used},
                {"lower_bound", r.lower_bound},
                {"consumption", r.consumption},
                {"hit_iteration_cap", r.hit_iteration_cap}};
}

json trace_metadata_to_json(const RunTrace& trace) {
    const auto& md = trace.metadata;
    json options{{"mode", md.options.estimator_mode == EstimatorMode::Weighted ? "weighted" : "unweighted"},
                 {"record_intervals", md.options.record_intervals},
                 {"delta_override", md.options.delta_override ? json(*md.options.delta_override) : json(nullptr)}};
    json inits = json::array();
    for (const auto& r : trace.init_records) {
        inits.push_back(init_record_to_json(r));
    }
    json finals = json::array();
    for (const auto& s : trace.final_states) {
        finals.push_back(s ? estimator_to_json(*s) : json(nullptr));
    }
    char hash[17];
    std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(md.instance_hash));
    return json{{"instance_hash", hash},
                {"seed", md.seed},
                {"delta", md.delta},
                {"self_initializing", md.self_initializing},
                {"options", options},
                {"horizon", trace.horizon},
                {"num_jobs", trace.num_jobs},
                {"cumulative_regret", trace.total_regret()},
                {"realized_successes", trace.realized_successes},
                {"init_records", inits},
                {"final_states", finals}};
}

std::string format_trace_csv(const RunTrace& trace) {
    const std::size_t k = trace.num_jobs;
    std::string out;
    out.reserve(trace.length() * (24 * k + 40));
    out += "t";
    for (std::size_t j = 1; j <= k; ++j) {
        out += ",M_" + std::to_string(j);
    }
    for (std::size_t j = 1; j <= k; ++j) {
        out += ",X_" + std::to_string(j);
    }
    out += ",r_t,cumregret";
    if (trace.has_intervals()) {
        for (std::size_t j = 1; j <= k; ++j) {
            out += ",L_" + std::to_string(j);
        }
        for (std::size_t j = 1; j <= k; ++j) {
            out += ",U_" + std::to_string(j);
        }
    }
    out += '\n';
    for (std::size_t step = 0; step < trace.length(); ++step) {
        out += std::to_string(step + 1);
        for (double m : trace.allocation(step)) {
            out += ',';
            out += format_double(m);
        }
        for (auto x : trace.outcome(step)) {
            out += x ? ",1" : ",0";
        }
        out += ',';
        out += format_double(trace.regret[step]);
        out += ',';
        out += format_double(trace.cumulative_regret[step]);
        if (trace.has_intervals()) {
            for (std::size_t j = 0; j < k; ++j) {
                out += ',';
                out += format_double(trace.lower_recips[step * k + j]);
            }
            for (std::size_t j = 0; j < k; ++j) {
                out += ',';
                out += format_double(trace.upper_recips[step * k + j]);
            }
        }
        out += '\n';
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) {
            f.close();
            std::error_code ignored;
            fs::remove(tmp, ignored);
            throw std::runtime_error("write failed for " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw std::runtime_error("cannot move output into place at " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace alloc_bandit
