#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridad/ml/decision_tree.hpp"
#include "gridad/parallel.hpp"

namespace gridad::ml {

struct ForestParams {
    int trees = 200;
    int max_depth = 16;
    int features_per_split = 0;  // 0 = ceil(sqrt(p))
    double min_samples_split = 2.0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    static ForestParams from_json(const nlohmann::json& doc);
};

struct RandomForest {
    int classes = 0;
    int features = 0;
    std::vector<DecisionTree> trees;

    /// Fraction of trees voting for each class.
    template <class Row>
    Eigen::VectorXd votes(const Row& x) const {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(classes);
        for (const auto& t : trees) {
            const auto& dist = t.leaf(x).value;
            v[std::max_element(dist.begin(), dist.end()) - dist.begin()] += 1.0;
        }
        return v / static_cast<double>(trees.size());
    }

    nlohmann::json to_json() const;
    static RandomForest from_json(const nlohmann::json& doc);
};

/// Tree t is grown from its own stream derive_seed(seed, t) on a bootstrap
/// resample, so serial and parallel training give the same forest.
RandomForest train_random_forest(const Eigen::MatrixXd& X, const std::vector<int>& y, int classes,
                                 const ForestParams& params, Execution exec = Execution::Parallel);

/// Bootstrap multiplicities for one tree.
std::vector<double> bootstrap_weights(int rows, Rng& rng);

}  // namespace gridad::ml
