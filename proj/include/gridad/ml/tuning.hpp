#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gridad/ml/classifier.hpp"

namespace gridad::ml {

/// One draw from the search grid of `kind`:
///   rf: trees in [50, 300], depth in [4, 16]
///   gbt: trees in [50, 300], depth in [2, 6], rate in [0.05, 0.5]
///   lr: l2 log-uniform in [1e-4, 1]
///   knn: k in {1, 3, ..., 25}
ModelParams sample_params(ModelKind kind, Rng& rng, const ModelParams& base = {});

/// Stratified k-fold assignment of `rows`: fold index per row.
std::vector<int> stratified_folds(const std::vector<int>& strata, int folds, std::uint64_t seed);

struct Trial {
    ModelParams params;
    double cv_macro_f1 = 0.0;
};

struct TuningResult {
    ModelParams best;
    double cv_macro_f1 = 0.0;
    std::vector<Trial> trials;
};

/// Seeded random search with 3-fold stratified CV on the train split. The
/// highest mean macro-F1 wins; ties go to fewer trees (rf, gbt) or smaller k.
TuningResult tune_hyperparameters(const Dataset& dataset, ModelKind kind, int budget, std::uint64_t seed,
                                  const std::vector<int>& feature_indices = {},
                                  Execution exec = Execution::Parallel, int folds = 3);

}  // namespace gridad::ml
