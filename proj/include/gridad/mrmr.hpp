#pragma once

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridad/dataset.hpp"
#include "gridad/parallel.hpp"

namespace gridad {

inline constexpr int kMiBins = 10;
inline constexpr double kRedundancyFloor = 1e-6;

/// Equal-frequency bin index (0..bins-1) of each value. Ties share a bin.
std::vector<int> equal_frequency_bins(const Eigen::VectorXd& values, int bins = kMiBins);

/// MI in nats between a feature (discretized into equal-frequency bins) and
/// integer class labels. Constant features give 0.
double mutual_information(const Eigen::VectorXd& feature, const std::vector<int>& labels,
                          int bins = kMiBins);

/// Average ranks (1-based), ties share the mean rank.
Eigen::VectorXd mid_ranks(const Eigen::VectorXd& values);

/// Pearson correlation of mid-ranks; 0 when either input has no spread.
double spearman_rank_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct SelectionResult {
    int k = 0;
    std::vector<int> indices;    // in selection order
    std::vector<double> scores;  // score at the iteration that picked it
    std::vector<double> relevance;  // per feature, all n_x

    nlohmann::json to_json() const;
    static SelectionResult from_json(const nlohmann::json& doc);
};

/// Greedy max-relevance / min-redundancy selection. Relevance is the MI with
/// the labels (mean over targets for indicator datasets); redundancy is the
/// mean |Spearman| against the selected set, floored. Uses the train split
/// when one is assigned, otherwise all samples. Ties go to the lower index.
SelectionResult mrmr_select(const Dataset& dataset, int k, Execution exec = Execution::Parallel);

}  // namespace gridad
