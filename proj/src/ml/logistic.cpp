#include "gridad/ml/logistic.hpp"

#include <cmath>

#include "gridad/error.hpp"

namespace gridad::ml {

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
    Standardizer s;
    const double n = static_cast<double>(X.rows());
    s.mean = X.colwise().mean();
    s.scale.resize(X.cols());
    for (int j = 0; j < X.cols(); ++j) {
        const double var = (X.col(j).array() - s.mean[j]).square().sum() / n;
        s.scale[j] = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
    return (X.rowwise() - mean).array().rowwise() / scale.array();
}

nlohmann::json Standardizer::to_json() const {
    return {{"mean", std::vector<double>(mean.data(), mean.data() + mean.size())},
            {"scale", std::vector<double>(scale.data(), scale.data() + scale.size())}};
}

Standardizer Standardizer::from_json(const nlohmann::json& doc) {
    const auto m = doc.at("mean").get<std::vector<double>>();
    const auto s = doc.at("scale").get<std::vector<double>>();
    if (m.size() != s.size()) throw DataError("model file: standardization vectors differ in length");
    Standardizer out;
    out.mean = Eigen::Map<const Eigen::RowVectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    out.scale = Eigen::Map<const Eigen::RowVectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
    return out;
}

nlohmann::json LogisticParams::to_json() const {
    return {{"l2", l2}, {"iterations", iterations}, {"rate", rate}, {"tolerance", tolerance}};
}

LogisticParams LogisticParams::from_json(const nlohmann::json& doc) {
    LogisticParams p;
    p.l2 = doc.value("l2", p.l2);
    p.iterations = doc.value("iterations", p.iterations);
    p.rate = doc.value("rate", p.rate);
    p.tolerance = doc.value("tolerance", p.tolerance);
    return p;
}

nlohmann::json LogisticModel::to_json() const {
    auto w = nlohmann::json::array();
    for (int c = 0; c < weights.rows(); ++c) {
        std::vector<double> row(weights.cols());
        for (int j = 0; j < weights.cols(); ++j) row[j] = weights(c, j);
        w.push_back(row);
    }
    return {{"standardization", standardizer.to_json()},
            {"weights", w},
            {"bias", std::vector<double>(bias.data(), bias.data() + bias.size())}};
}

LogisticModel LogisticModel::from_json(const nlohmann::json& doc) {
    LogisticModel m;
    m.standardizer = Standardizer::from_json(doc.at("standardization"));
    const auto rows = doc.at("weights").get<std::vector<std::vector<double>>>();
    const auto b = doc.at("bias").get<std::vector<double>>();
    if (rows.empty() || rows.size() != b.size()) throw DataError("model file: weight/bias shape mismatch");
    m.weights.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t c = 0; c < rows.size(); ++c) {
        if (rows[c].size() != rows[0].size()) throw DataError("model file: ragged weight matrix");
        for (std::size_t j = 0; j < rows[c].size(); ++j) m.weights(c, j) = rows[c][j];
    }
    if (m.weights.cols() != m.standardizer.mean.size())
        throw DataError("model file: weights do not match the standardization width");
    m.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
    return m;
}

double logistic_objective(const Eigen::MatrixXd& W, const Eigen::VectorXd& b,
                          const Eigen::MatrixXd& Xs, const std::vector<int>& y, double l2,
                          Eigen::MatrixXd* grad_W, Eigen::VectorXd* grad_b) {
    const int n = static_cast<int>(Xs.rows());
    Eigen::MatrixXd Z = Xs * W.transpose();  // n x classes
    Z.rowwise() += b.transpose();
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double zmax = Z.row(i).maxCoeff();
        Z.row(i).array() -= zmax;
        const double lse = std::log(Z.row(i).array().exp().sum());
        loss += lse - Z(i, y[i]);
        Z.row(i) = (Z.row(i).array() - lse).exp();  // softmax probabilities
    }
    loss = loss / n + 0.5 * l2 * W.squaredNorm();
    if (grad_W || grad_b) {
        for (int i = 0; i < n; ++i) Z(i, y[i]) -= 1.0;
        if (grad_W) *grad_W = Z.transpose() * Xs / n + l2 * W;
        if (grad_b) *grad_b = Z.colwise().sum().transpose() / n;
    }
    return loss;
}

LogisticModel train_logistic_regression(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                        int classes, const LogisticParams& params) {
    if (static_cast<int>(y.size()) != X.rows() || X.rows() == 0)
        throw UsageError("logistic regression: label count does not match the feature rows");
    for (int c : y)
        if (c < 0 || c >= classes) throw UsageError("logistic regression: label outside [0, classes)");
    LogisticModel m;
    m.standardizer = Standardizer::fit(X);
    const Eigen::MatrixXd Xs = m.standardizer.apply(X);
    const int n = static_cast<int>(X.rows());
    const int p = static_cast<int>(X.cols());

    // Lipschitz bound of the softmax cross-entropy gradient: 1/2 lambda_max(Xa^T Xa)/n + l2,
    // Xa the standardized rows with a bias column; lambda_max by power iteration.
    Eigen::MatrixXd Xa(n, p + 1);
    Xa << Xs, Eigen::VectorXd::Ones(n);
    const Eigen::MatrixXd gram = Xa.transpose() * Xa / n;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(p + 1).normalized();
    double lambda_max = 1.0;
    for (int k = 0; k < 100; ++k) {
        const Eigen::VectorXd w = gram * v;
        const double norm = w.norm();
        if (norm <= 0.0) break;
        lambda_max = norm;
        v = w / norm;
    }
    const double lipschitz = 0.5 * lambda_max * 1.05 + params.l2;
    const double step = params.rate / lipschitz;

    m.weights = Eigen::MatrixXd::Zero(classes, p);
    m.bias = Eigen::VectorXd::Zero(classes);
    Eigen::MatrixXd gW;
    Eigen::VectorXd gb;
    double prev = logistic_objective(m.weights, m.bias, Xs, y, params.l2, &gW, &gb);
    int rising = 0;
    for (m.iterations = 0; m.iterations < params.iterations; ++m.iterations) {
        const double gmax = std::max(gW.cwiseAbs().maxCoeff(), gb.cwiseAbs().maxCoeff());
        if (gmax < params.tolerance) break;
        m.weights -= step * gW;
        m.bias -= step * gb;
        const double loss = logistic_objective(m.weights, m.bias, Xs, y, params.l2, &gW, &gb);
        if (!std::isfinite(loss)) throw NumericalError("logistic regression: loss became non-finite");
        rising = loss > prev ? rising + 1 : 0;
        if (rising >= 10) throw NumericalError("logistic regression diverged (loss rose 10 consecutive steps)");
        prev = loss;
    }
    return m;
}

}  // namespace gridad::ml
