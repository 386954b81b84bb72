#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "gridad/detection.hpp"
#include "gridad/parallel.hpp"
#include "gridad/scenario.hpp"

namespace gridad {

/// Expands a scenario grid into one config per scenario. Seeds are
/// derive_seed(master, index) in expansion order. Recognized blocks:
///   slc:        {buses, fractions, onset, clear?}         buses x fractions
///   fdia:       {states, offsets, onset, clear?}          states x offsets
///   multi_slc:  {count, max_buses, fraction_range, onset}
///   multi_fdia: {count, max_buses, max_states, offset_range, onset}
///   normal:     {count}
/// each repeated over `topologies` (default [0]) and `repeats` (default 1).
/// "buses": "load" selects every bus carrying load; "states": "all" every
/// packed state.
std::vector<ScenarioConfig> expand_grid(const nlohmann::json& grid, std::uint64_t master_seed);

std::vector<ScenarioTrace> simulate_batch(const std::vector<ScenarioConfig>& configs,
                                          Execution exec = Execution::Parallel);

std::vector<DetectionReport> detect_batch(const std::vector<ScenarioTrace>& traces,
                                          const DetectionConfig& config,
                                          Execution exec = Execution::Parallel);

}  // namespace gridad
