#include "gridad/ml/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gridad/error.hpp"

namespace gridad::ml {

ModelParams sample_params(ModelKind kind, Rng& rng, const ModelParams& base) {
    ModelParams p = base;
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    switch (kind) {
        case ModelKind::RandomForest:
            p.rf.trees = uniform_int(50, 300);
            p.rf.max_depth = uniform_int(4, 16);
            break;
        case ModelKind::BoostedTrees:
            p.gbt.trees = uniform_int(50, 300);
            p.gbt.max_depth = uniform_int(2, 6);
            p.gbt.rate = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
            break;
        case ModelKind::Logistic:
            p.lr.l2 = std::pow(10.0, std::uniform_real_distribution<double>(-4.0, 0.0)(rng));
            break;
        case ModelKind::Knn: p.knn.k = 2 * uniform_int(0, 12) + 1; break;
    }
    return p;
}

std::vector<int> stratified_folds(const std::vector<int>& strata, int folds, std::uint64_t seed) {
    if (folds < 2) throw UsageError("cross-validation needs at least two folds");
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < static_cast<int>(strata.size()); ++i) groups[strata[i]].push_back(i);
    Rng rng(seed);
    std::vector<int> fold(strata.size(), 0);
    int offset = 0;
    for (auto& [cls, members] : groups) {
        std::shuffle(members.begin(), members.end(), rng);
        // Continue the round robin across classes so small classes do not all
        // land in fold 0.
        for (std::size_t i = 0; i < members.size(); ++i) fold[members[i]] = (offset + static_cast<int>(i)) % folds;
        offset = (offset + static_cast<int>(members.size())) % folds;
    }
    return fold;
}

namespace {

int size_key(ModelKind kind, const ModelParams& p) {
    switch (kind) {
        case ModelKind::RandomForest: return p.rf.trees;
        case ModelKind::BoostedTrees: return p.gbt.trees;
        case ModelKind::Knn: return p.knn.k;
        case ModelKind::Logistic: return 0;
    }
    return 0;
}

}  // namespace

TuningResult tune_hyperparameters(const Dataset& dataset, ModelKind kind, int budget, std::uint64_t seed,
                                  const std::vector<int>& feature_indices, Execution exec, int folds) {
    if (budget < 1) throw UsageError("tuning budget must be at least 1");
    std::vector<int> rows = dataset.rows(Split::Train);
    if (rows.empty()) {
        rows.resize(dataset.size());
        std::iota(rows.begin(), rows.end(), 0);
    }
    std::vector<int> strata(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int r = rows[i];
        if (!dataset.multi_label()) {
            strata[i] = dataset.labels[r];
        } else {
            int key = -1;
            for (int j = 0; j < dataset.origins.cols() && key < 0; ++j)
                if (dataset.origins(r, j)) key = j;
            strata[i] = key;
        }
    }
    const auto fold = stratified_folds(strata, folds, derive_seed(seed, 1));

    Rng rng(derive_seed(seed, 0));
    TuningResult out;
    for (int b = 0; b < budget; ++b) {
        ModelParams params = sample_params(kind, rng);
        params.set_seed(derive_seed(seed, 100 + static_cast<std::uint64_t>(b)));
        double total = 0.0;
        for (int k = 0; k < folds; ++k) {
            std::vector<int> train, test;
            for (std::size_t i = 0; i < rows.size(); ++i) (fold[i] == k ? test : train).push_back(rows[i]);
            ModelParams fp = params;
            if (kind == ModelKind::Knn) fp.knn.k = std::min<int>(fp.knn.k, static_cast<int>(train.size()));
            const auto model = train_model_on(dataset, train, kind, fp, feature_indices, exec);
            total += evaluate_model(model, dataset, test, exec).macro_f1;
        }
        const double score = total / folds;
        out.trials.push_back({params, score});
        const bool better = b == 0 || score > out.cv_macro_f1 ||
                            (score == out.cv_macro_f1 && size_key(kind, params) < size_key(kind, out.best));
        if (better) {
            out.best = params;
            out.cv_macro_f1 = score;
        }
    }
    return out;
}

}  // namespace gridad::ml
