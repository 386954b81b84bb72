#pragma once

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace gridad::ml {

/// Per-feature centering and scaling fitted on the training split only.
/// Constant columns keep scale 1.
struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& X);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const;
    template <class Row>
    Eigen::RowVectorXd apply_row(const Row& x) const {
        return (x.array() - mean.array()) / scale.array();
    }

    nlohmann::json to_json() const;
    static Standardizer from_json(const nlohmann::json& doc);
};

struct LogisticParams {
    double l2 = 1e-3;
    int iterations = 2000;
    /// Step size in units of 1/L, L the Lipschitz bound of the gradient.
    double rate = 1.0;
    double tolerance = 1e-5;

    nlohmann::json to_json() const;
    static LogisticParams from_json(const nlohmann::json& doc);
};

struct LogisticModel {
    Standardizer standardizer;
    Eigen::MatrixXd weights;  // classes x features
    Eigen::VectorXd bias;     // classes
    int iterations = 0;

    template <class Row>
    Eigen::VectorXd scores(const Row& x) const {
        const Eigen::RowVectorXd xs = standardizer.apply_row(x);
        Eigen::VectorXd z = weights * xs.transpose() + bias;
        z.array() -= z.maxCoeff();
        z = z.array().exp();
        return z / z.sum();
    }

    nlohmann::json to_json() const;
    static LogisticModel from_json(const nlohmann::json& doc);
};

/// Mean multinomial cross-entropy of standardized rows plus (l2/2)||W||^2.
/// Fills the gradients when the pointers are non-null.
double logistic_objective(const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                          const Eigen::MatrixXd& Xs, const std::vector<int>& y, double l2,
                          Eigen::MatrixXd* grad_W = nullptr, Eigen::VectorXd* grad_b = nullptr);

/// Full-batch gradient descent until the gradient infinity-norm drops below
/// the tolerance or the iteration cap. Throws NumericalError when the loss
/// rises ten steps in a row.
LogisticModel train_logistic_regression(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                        int classes, const LogisticParams& params);

}  // namespace gridad::ml
