#include "gridad/ml/knn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridad/error.hpp"

namespace gridad::ml {

namespace {

struct Vote {
    int label;
    Eigen::VectorXd fractions;
};

Vote vote(const KnnModel& m, const Eigen::RowVectorXd& x) {
    const Eigen::RowVectorXd xs = m.standardizer.apply_row(x);
    const int n = static_cast<int>(m.train.rows());
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = (m.train.row(i) - xs).squaredNorm();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    const int k = std::min(m.k, n);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                      [&](int a, int b) { return d[a] < d[b] || (d[a] == d[b] && a < b); });
    Eigen::VectorXd count = Eigen::VectorXd::Zero(m.classes), dist = Eigen::VectorXd::Zero(m.classes);
    for (int j = 0; j < k; ++j) {
        count[m.labels[idx[j]]] += 1.0;
        dist[m.labels[idx[j]]] += std::sqrt(d[idx[j]]);
    }
    int best = -1;
    for (int c = 0; c < m.classes; ++c) {
        if (count[c] == 0.0) continue;
        if (best < 0 || count[c] > count[best] ||
            (count[c] == count[best] && dist[c] / count[c] < dist[best] / count[best]))
            best = c;
    }
    return {best, count / static_cast<double>(k)};
}

}  // namespace

Eigen::VectorXd KnnModel::scores(const Eigen::RowVectorXd& x) const { return vote(*this, x).fractions; }

int KnnModel::predict(const Eigen::RowVectorXd& x) const { return vote(*this, x).label; }

std::vector<int> KnnModel::predict_batch(const Eigen::MatrixXd& X, Execution exec) const {
    std::vector<int> out(X.rows());
    for_each_index(static_cast<int>(X.rows()), exec, [&](int i) { out[i] = predict(X.row(i)); });
    return out;
}

nlohmann::json KnnModel::to_json() const {
    auto rows = nlohmann::json::array();
    for (int i = 0; i < train.rows(); ++i) {
        std::vector<double> r(train.cols());
        for (int j = 0; j < train.cols(); ++j) r[j] = train(i, j);
        rows.push_back(r);
    }
    return {{"standardization", standardizer.to_json()}, {"k", k}, {"classes", classes},
            {"train", rows}, {"labels", labels}};
}

KnnModel KnnModel::from_json(const nlohmann::json& doc) {
    KnnModel m;
    m.standardizer = Standardizer::from_json(doc.at("standardization"));
    m.k = doc.at("k").get<int>();
    m.classes = doc.at("classes").get<int>();
    m.labels = doc.at("labels").get<std::vector<int>>();
    const auto rows = doc.at("train").get<std::vector<std::vector<double>>>();
    if (rows.size() != m.labels.size() || rows.empty()) throw DataError("model file: KNN rows/labels mismatch");
    m.train.resize(static_cast<Eigen::Index>(rows.size()), m.standardizer.mean.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != m.train.cols())
            throw DataError("model file: KNN row width mismatch");
        for (std::size_t j = 0; j < rows[i].size(); ++j) m.train(i, j) = rows[i][j];
    }
    return m;
}

KnnModel train_knn(const Eigen::MatrixXd& X, const std::vector<int>& y, int classes, const KnnParams& params) {
    if (static_cast<int>(y.size()) != X.rows() || X.rows() == 0)
        throw UsageError("KNN: label count does not match the feature rows");
    if (params.k < 1 || params.k > X.rows())
        throw UsageError("KNN: k must lie in [1, training size]");
    KnnModel m;
    m.standardizer = Standardizer::fit(X);
    m.train = m.standardizer.apply(X);
    m.labels = y;
    m.classes = classes;
    m.k = params.k;
    return m;
}

}  // namespace gridad::ml
