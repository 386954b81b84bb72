#pragma once

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridad/ml/logistic.hpp"
#include "gridad/parallel.hpp"

namespace gridad::ml {

struct KnnParams {
    int k = 5;

    nlohmann::json to_json() const { return {{"k", k}}; }
    static KnnParams from_json(const nlohmann::json& doc) { return {doc.value("k", 5)}; }
};

struct KnnModel {
    Standardizer standardizer;
    Eigen::MatrixXd train;  // standardized rows
    std::vector<int> labels;
    int classes = 0;
    int k = 5;

    /// Vote fractions among the k nearest standardized rows. Ties in the
    /// vote go to the class with the smaller mean neighbour distance, then the
    /// lower class index.
    Eigen::VectorXd scores(const Eigen::RowVectorXd& x) const;
    int predict(const Eigen::RowVectorXd& x) const;
    std::vector<int> predict_batch(const Eigen::MatrixXd& X, Execution exec = Execution::Parallel) const;

    nlohmann::json to_json() const;
    static KnnModel from_json(const nlohmann::json& doc);
};

KnnModel train_knn(const Eigen::MatrixXd& X, const std::vector<int>& y, int classes, const KnnParams& params);

}  // namespace gridad::ml
