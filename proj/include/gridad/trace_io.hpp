#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "gridad/scenario.hpp"

namespace gridad {

/// FNV-1a over the compact JSON dump. Recorded in every artifact header.
std::uint64_t config_hash(const nlohmann::json& config);
std::string hash_hex(std::uint64_t hash);

/// "config=<hash> seed=<seed>" line used as the first CSV comment.
std::string provenance_line(const nlohmann::json& config, std::uint64_t seed);

/// `<stem>.json` next to a `<stem>.csv` artifact.
std::string sidecar_path(const std::string& csv_path);

/// Trace CSV (t, label, label_targets, z_*, z_clean_*, x_true_*) plus a JSON
/// sidecar holding topology, plan, specs, seed and the generating config.
void write_trace(const ScenarioTrace& trace, const std::string& csv_path,
                 const nlohmann::json& config);

/// Inverse of write_trace. Labels are rebuilt from the sidecar specs and
/// checked against the label column. Throws DataError naming the line.
ScenarioTrace read_trace(const std::string& csv_path);

nlohmann::json read_json_file(const std::string& path);

}  // namespace gridad
