#pragma once

#include <vector>

#include <Eigen/Dense>

namespace gridad::ml {

struct ConfusionCounts {
    std::vector<int> tp, fp, fn;

    int classes() const { return static_cast<int>(tp.size()); }
};

ConfusionCounts confusion_counts(const std::vector<int>& truth, const std::vector<int>& predicted, int classes);

struct ClassScore {
    double precision = 0.0;  // fraction
    double recall = 0.0;     // fraction
    double f1 = 0.0;         // percent
};

/// Empty denominators yield 0.
ClassScore precision_recall_f1(const ConfusionCounts& counts, int cls);

/// Unweighted mean of per-class F1 values (percent).
double macro_f1(const std::vector<double>& f1);

/// Macro-F1 over the classes occurring in the truth or the predictions.
double macro_f1(const std::vector<int>& truth, const std::vector<int>& predicted, int classes);

/// Per-target indicator macro-F1: mean positive-class F1 over the targets
/// that are positive somewhere in the truth or the predictions.
double indicator_macro_f1(const Eigen::MatrixXi& truth, const Eigen::MatrixXi& predicted);

double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted);

}  // namespace gridad::ml
