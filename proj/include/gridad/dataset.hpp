#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridad/detection.hpp"
#include "gridad/scenario.hpp"

namespace gridad {

enum class Task { Classify, IdentifySlc, IdentifyFdia };

std::string to_string(Task task);  // "classify", "identify-SLC", "identify-FDIA"
Task task_from_string(const std::string& text);

enum class Split { Unassigned = -1, Train = 0, Test = 1 };

struct Dataset {
    Task task = Task::Classify;
    std::vector<std::string> feature_names;
    Eigen::MatrixXd features;  // samples x n_x

    // Single-label view. Classify: 0 = SLC, 1 = FDIA. Identify tasks: one class
    // per origin that occurs alone. -1 marks multi-origin samples.
    std::vector<std::string> class_names;
    std::vector<int> labels;

    // Identify tasks: indicator per target of the task's target space (buses
    // for SLC, packed states for FDIA).
    std::vector<std::string> target_names;
    Eigen::MatrixXi origins;

    std::vector<int> topology;
    std::vector<int> trace;
    std::vector<int> step;
    std::vector<Split> split;

    std::uint64_t seed = 0;
    std::string split_mode;

    int size() const { return static_cast<int>(features.rows()); }
    int feature_count() const { return static_cast<int>(features.cols()); }
    /// True when some sample has more than one origin; such datasets are
    /// handled as per-target indicators.
    bool multi_label() const;
    std::vector<int> rows(Split which) const;
    /// Same samples restricted to the given feature columns (in that order).
    Dataset select_features(const std::vector<int>& indices) const;
    /// Samples at the given rows, in that order.
    Dataset subset(const std::vector<int>& rows) const;
    /// Per-class sample counts (single-label) or per-target positives.
    std::vector<int> class_counts() const;
};

struct AssemblyStats {
    int flagged = 0;
    int used = 0;
    int false_alarms = 0;  // flagged while labeled normal; dropped
    int off_task = 0;      // flagged while the active anomaly is outside the task; dropped
};

/// One sample per ADI-flagged step. `reports[i]` must come from `traces[i]`.
/// Throws DataError when no flagged step qualifies.
Dataset assemble_dataset(const std::vector<ScenarioTrace>& traces,
                         const std::vector<DetectionReport>& reports, Task task,
                         AssemblyStats* stats = nullptr);

/// Downsamples every class to the smallest class count (single-label only),
/// keeping a seeded random subset in original order. Any split is kept.
Dataset balance_classes(const Dataset& dataset, std::uint64_t seed);

/// Removes classes with fewer than `min_count` samples (single-label only)
/// and renumbers the rest. Names of removed classes go to `dropped`.
Dataset drop_rare_classes(const Dataset& dataset, int min_count, std::vector<std::string>* dropped = nullptr);

/// Per class, round(fraction * count) samples go to train. Multi-label
/// datasets stratify on each sample's lowest-index origin. Throws DataError
/// for a class with a single sample.
void stratified_split(Dataset& dataset, double fraction, std::uint64_t seed);

/// Train on the listed topology ids, test on every other one.
void topology_holdout_split(Dataset& dataset, const std::vector<int>& train_topologies);

/// CSV (f_0.., class, o_<target>.., topology, trace, t, split) plus a JSON
/// schema sidecar with the feature index map, classes, targets and seed.
void write_dataset(const Dataset& dataset, const std::string& csv_path,
                   const nlohmann::json& config);
Dataset read_dataset(const std::string& csv_path);

}  // namespace gridad
