#include "gridad/ml/metrics.hpp"

#include "gridad/error.hpp"

namespace gridad::ml {

ConfusionCounts confusion_counts(const std::vector<int>& truth, const std::vector<int>& predicted, int classes) {
    if (truth.size() != predicted.size()) throw UsageError("confusion counts: length mismatch");
    ConfusionCounts c{std::vector<int>(classes, 0), std::vector<int>(classes, 0), std::vector<int>(classes, 0)};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == predicted[i]) {
            ++c.tp.at(truth[i]);
        } else {
            ++c.fn.at(truth[i]);
            ++c.fp.at(predicted[i]);
        }
    }
    return c;
}

ClassScore precision_recall_f1(const ConfusionCounts& counts, int cls) {
    const double tp = counts.tp.at(cls), fp = counts.fp.at(cls), fn = counts.fn.at(cls);
    ClassScore s;
    s.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    s.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    s.f1 = s.precision + s.recall > 0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) * 100.0 : 0.0;
    return s;
}

double macro_f1(const std::vector<double>& f1) {
    if (f1.empty()) throw UsageError("macro-F1 needs at least one class");
    double sum = 0.0;
    for (double v : f1) sum += v;
    return sum / static_cast<double>(f1.size());
}

double macro_f1(const std::vector<int>& truth, const std::vector<int>& predicted, int classes) {
    const auto counts = confusion_counts(truth, predicted, classes);
    std::vector<double> f1;
    for (int c = 0; c < classes; ++c)
        if (counts.tp[c] + counts.fn[c] + counts.fp[c] > 0) f1.push_back(precision_recall_f1(counts, c).f1);
    return macro_f1(f1);
}

double indicator_macro_f1(const Eigen::MatrixXi& truth, const Eigen::MatrixXi& predicted) {
    if (truth.rows() != predicted.rows() || truth.cols() != predicted.cols())
        throw UsageError("indicator macro-F1: shape mismatch");
    std::vector<double> f1;
    for (int j = 0; j < truth.cols(); ++j) {
        ConfusionCounts c{{0, 0}, {0, 0}, {0, 0}};
        for (int i = 0; i < truth.rows(); ++i) {
            const int t = truth(i, j) != 0, p = predicted(i, j) != 0;
            if (t && p) ++c.tp[1];
            else if (t) ++c.fn[1];
            else if (p) ++c.fp[1];
        }
        if (c.tp[1] + c.fn[1] + c.fp[1] > 0) f1.push_back(precision_recall_f1(c, 1).f1);
    }
    return macro_f1(f1);
}

double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
    if (truth.empty() || truth.size() != predicted.size()) throw UsageError("accuracy: bad lengths");
    int hit = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == predicted[i];
    return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace gridad::ml
