#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridad/ml/decision_tree.hpp"
#include "gridad/parallel.hpp"

namespace gridad::ml {

struct BoostParams {
    int trees = 100;
    int max_depth = 4;
    double rate = 0.3;
    double lambda = 1.0;
    double gamma = 0.0;  // per-leaf complexity penalty
    double min_child_weight = 1.0;
    double subsample = 1.0;
    std::uint64_t seed = 0;

    nlohmann::json to_json() const;
    static BoostParams from_json(const nlohmann::json& doc);
};

/// One logistic booster: margin = init + rate * sum_j w_j(x).
struct BinaryBooster {
    double init = 0.0;
    double rate = 0.3;
    std::vector<DecisionTree> trees;
    std::vector<double> loss_history;  // training loss after each stage; not persisted

    template <class Row>
    double margin(const Row& x) const {
        double m = init;
        for (const auto& t : trees) m += rate * t.leaf(x).value[0];
        return m;
    }
};

double sigmoid(double m);

/// Binary logistic booster on 0/1 targets.
BinaryBooster train_binary_booster(const Presorted& data, const std::vector<int>& target,
                                   const BoostParams& params, std::uint64_t seed);

struct BoostedTrees {
    int classes = 0;
    int features = 0;
    std::vector<BinaryBooster> boosters;  // one for two classes, else one per class

    /// Class scores summing to 1: (1 - s, s) for two classes, normalized
    /// one-vs-rest sigmoids otherwise.
    template <class Row>
    Eigen::VectorXd scores(const Row& x) const {
        Eigen::VectorXd s(classes);
        if (classes == 2) {
            const double q = sigmoid(boosters[0].margin(x));
            s << 1.0 - q, q;
            return s;
        }
        for (int c = 0; c < classes; ++c) s[c] = sigmoid(boosters[c].margin(x));
        const double total = s.sum();
        return total > 0.0 ? Eigen::VectorXd(s / total) : Eigen::VectorXd::Constant(classes, 1.0 / classes);
    }

    nlohmann::json to_json() const;
    static BoostedTrees from_json(const nlohmann::json& doc);
};

/// Multi-class via one-vs-rest boosters, trained concurrently under
/// Execution::Parallel.
BoostedTrees train_gradient_boosted_trees(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                          int classes, const BoostParams& params,
                                          Execution exec = Execution::Parallel);

}  // namespace gridad::ml
