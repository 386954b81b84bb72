#include "gridad/mrmr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gridad/error.hpp"

namespace gridad {

std::vector<int> equal_frequency_bins(const Eigen::VectorXd& values, int bins) {
    const int n = static_cast<int>(values.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    std::vector<int> out(n, 0);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        // A run of ties takes the bin of its first position.
        const int bin = std::min(bins - 1, static_cast<int>(static_cast<long long>(i) * bins / n));
        for (int k = i; k <= j; ++k) out[order[k]] = bin;
        i = j + 1;
    }
    return out;
}

double mutual_information(const Eigen::VectorXd& feature, const std::vector<int>& labels, int bins) {
    const int n = static_cast<int>(feature.size());
    if (n < 2 || static_cast<int>(labels.size()) != n)
        throw UsageError("mutual information needs two or more labelled samples");
    if (feature.maxCoeff() == feature.minCoeff()) return 0.0;
    const auto bx = equal_frequency_bins(feature, bins);
    const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
    std::vector<double> joint(static_cast<std::size_t>(bins) * classes, 0.0), px(bins, 0.0), py(classes, 0.0);
    for (int i = 0; i < n; ++i) {
        joint[static_cast<std::size_t>(bx[i]) * classes + labels[i]] += 1.0;
        px[bx[i]] += 1.0;
        py[labels[i]] += 1.0;
    }
    double mi = 0.0;
    for (int a = 0; a < bins; ++a)
        for (int c = 0; c < classes; ++c) {
            const double j = joint[static_cast<std::size_t>(a) * classes + c];
            if (j > 0.0) mi += j / n * std::log(j * n / (px[a] * py[c]));
        }
    return std::max(0.0, mi);
}

Eigen::VectorXd mid_ranks(const Eigen::VectorXd& values) {
    const int n = static_cast<int>(values.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] < values[b]; });
    Eigen::VectorXd ranks(n);
    int i = 0;
    while (i < n) {
        int j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * (i + j) + 1.0;
        for (int k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

namespace {

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const Eigen::VectorXd da = a.array() - a.mean();
    const Eigen::VectorXd db = b.array() - b.mean();
    const double sa = da.squaredNorm(), sb = db.squaredNorm();
    if (sa <= 0.0 || sb <= 0.0) return 0.0;
    return std::clamp(da.dot(db) / std::sqrt(sa * sb), -1.0, 1.0);
}

}  // namespace

double spearman_rank_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw UsageError("Spearman correlation needs two equal-length vectors of length >= 2");
    return pearson(mid_ranks(a), mid_ranks(b));
}

nlohmann::json SelectionResult::to_json() const {
    return {{"k", k}, {"indices", indices}, {"scores", scores}, {"relevance", relevance}};
}

SelectionResult SelectionResult::from_json(const nlohmann::json& doc) {
    SelectionResult s;
    try {
        s.k = doc.at("k").get<int>();
        s.indices = doc.at("indices").get<std::vector<int>>();
        s.scores = doc.value("scores", std::vector<double>{});
        s.relevance = doc.value("relevance", std::vector<double>{});
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("selection file: ") + e.what());
    }
    if (static_cast<int>(s.indices.size()) != s.k) throw DataError("selection file: k does not match indices");
    return s;
}

SelectionResult mrmr_select(const Dataset& dataset, int k, Execution exec) {
    const int p = dataset.feature_count();
    if (k < 1 || k > p)
        throw UsageError("k = " + std::to_string(k) + " outside [1, " + std::to_string(p) + "]");
    std::vector<int> rows = dataset.rows(Split::Train);
    if (rows.empty()) {
        rows.resize(dataset.size());
        std::iota(rows.begin(), rows.end(), 0);
    }
    const int n = static_cast<int>(rows.size());
    if (n < 2) throw DataError("feature selection needs at least two samples");
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < n; ++i) X.row(i) = dataset.features.row(rows[i]);

    // Label sets: one for single-label data, one indicator per target otherwise.
    std::vector<std::vector<int>> label_sets;
    if (!dataset.multi_label()) {
        std::vector<int> y(n);
        for (int i = 0; i < n; ++i) y[i] = dataset.labels[rows[i]];
        label_sets.push_back(std::move(y));
    } else {
        for (int j = 0; j < dataset.origins.cols(); ++j) {
            std::vector<int> y(n);
            int pos = 0;
            for (int i = 0; i < n; ++i) pos += (y[i] = dataset.origins(rows[i], j));
            if (pos > 0 && pos < n) label_sets.push_back(std::move(y));
        }
        if (label_sets.empty()) throw DataError("feature selection: no target varies in the data");
    }

    SelectionResult out;
    out.k = k;
    out.relevance.assign(p, 0.0);
    Eigen::MatrixXd ranks(n, p);
    auto prepare = [&](int f) {
        const Eigen::VectorXd col = X.col(f);
        double rel = 0.0;
        for (const auto& y : label_sets) rel += mutual_information(col, y);
        out.relevance[f] = rel / static_cast<double>(label_sets.size());
        ranks.col(f) = mid_ranks(col);
    };
    if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int f = 0; f < p; ++f) prepare(f);
    } else {
        for (int f = 0; f < p; ++f) prepare(f);
    }

    // Centered, unit-norm rank columns turn each Spearman term into a dot product.
    Eigen::MatrixXd z = ranks.rowwise() - ranks.colwise().mean();
    std::vector<bool> flat(p, false);
    for (int f = 0; f < p; ++f) {
        const double norm = z.col(f).norm();
        if (norm > 0.0) z.col(f) /= norm;
        else flat[f] = true;
    }

    std::vector<double> redundancy_sum(p, 0.0);
    std::vector<bool> taken(p, false);
    for (int it = 0; it < k; ++it) {
        if (it > 0) {
            const int last = out.indices.back();
            auto accumulate = [&](int f) {
                if (taken[f] || flat[f] || flat[last]) return;
                redundancy_sum[f] += std::abs(std::clamp(z.col(f).dot(z.col(last)), -1.0, 1.0));
            };
            if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(static)
                for (int f = 0; f < p; ++f) accumulate(f);
            } else {
                for (int f = 0; f < p; ++f) accumulate(f);
            }
        }
        int best = -1;
        double best_score = 0.0;
        for (int f = 0; f < p; ++f) {
            if (taken[f]) continue;
            const double denom =
                it == 0 ? 1.0 : std::max(kRedundancyFloor, redundancy_sum[f] / static_cast<double>(it));
            const double score = out.relevance[f] / denom;
            if (best < 0 || score > best_score) {
                best = f;
                best_score = score;
            }
        }
        taken[best] = true;
        out.indices.push_back(best);
        out.scores.push_back(best_score);
    }
    return out;
}

}  // namespace gridad
