#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "alloc_bandit/estimator.hpp"
#include "alloc_bandit/model.hpp"
#include "alloc_bandit/trace.hpp"

namespace alloc_bandit {

// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

// {"nus": [...], "horizon": n, "seed": s}; null in nus means unbounded.
nlohmann::json instance_to_json(const ProblemInstance& instance);
ProblemInstance instance_from_json(const nlohmann::json& j);

// {L, U, sum_wx, sum_wm, r_max, t, delta, T, u_alpha: {alpha: count}}
nlohmann::json estimator_to_json(const EstimatorState& state);
EstimatorState estimator_from_json(const nlohmann::json& j);

nlohmann::json init_record_to_json(const InitRecord& record);
nlohmann::json trace_metadata_to_json(const RunTrace& trace);

// Header: t, M_1..M_K, X_1..X_K, r_t, cumregret [, L_1..L_K, U_1..U_K]
std::string format_trace_csv(const RunTrace& trace);

// Writes to a sibling temporary file, then renames over `path`, so a
// failure never leaves a partial file behind. Throws std::runtime_error
// naming the path on I/O failure.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

}  // namespace alloc_bandit
