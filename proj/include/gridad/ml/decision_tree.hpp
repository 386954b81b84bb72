#pragma once

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridad/rng.hpp"

namespace gridad::ml {

/// Internal nodes route x[feature] <= threshold to `left`. Leaves carry a
/// class distribution (classification) or a single weight w_q (boosting).
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> value;

    bool leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    template <class Row>
    const TreeNode& leaf(const Row& x) const {
        int i = 0;
        while (!nodes[i].leaf()) i = x(nodes[i].feature) <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
        return nodes[i];
    }
    int depth() const;
    int leaves() const;

    nlohmann::json to_json() const;
    static DecisionTree from_json(const nlohmann::json& doc);
};

/// Row order of every feature, sorted once and shared by all trees grown on
/// the same matrix.
class Presorted {
public:
    explicit Presorted(const Eigen::MatrixXd& X);

    const Eigen::MatrixXd& data() const { return *X_; }
    const std::vector<int>& order(int feature) const { return order_[feature]; }
    int rows() const { return static_cast<int>(X_->rows()); }
    int features() const { return static_cast<int>(X_->cols()); }

private:
    const Eigen::MatrixXd* X_;
    std::vector<std::vector<int>> order_;
};

struct TreeParams {
    int max_depth = 8;
    double min_samples_split = 2.0;  // in sample weight
    int features_per_split = 0;      // 0 = all features
    // Boosting only.
    double lambda = 1.0;
    double gamma = 0.0;
    double min_child_weight = 1.0;
};

/// Gini impurity sum_i p_i (1 - p_i) of a count or proportion vector.
double gini_impurity(const std::vector<double>& counts);

/// Classification tree minimizing weighted child gini. `weight[r]` is the
/// multiplicity of row r (bootstrap counts; 0 leaves the row out). Feature
/// subsets are drawn from `rng` when features_per_split < p.
DecisionTree grow_classification_tree(const Presorted& data, const std::vector<int>& labels,
                                      int classes, const std::vector<double>& weight,
                                      const TreeParams& params, Rng& rng);

/// Second-order regression tree over gradients g and hessians h: leaf weight
/// -G/(H+lambda), split gain 1/2 [GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l)] - gamma.
DecisionTree grow_boosting_tree(const Presorted& data, const std::vector<double>& g,
                                const std::vector<double>& h, const std::vector<double>& weight,
                                const TreeParams& params, Rng& rng);

}  // namespace gridad::ml
