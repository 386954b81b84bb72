#include "gridad/ml/random_forest.hpp"

#include <cmath>

#include "gridad/error.hpp"

namespace gridad::ml {

nlohmann::json ForestParams::to_json() const {
    return {{"trees", trees}, {"max_depth", max_depth}, {"features_per_split", features_per_split},
            {"min_samples_split", min_samples_split}, {"seed", seed}};
}

ForestParams ForestParams::from_json(const nlohmann::json& doc) {
    ForestParams p;
    p.trees = doc.value("trees", p.trees);
    p.max_depth = doc.value("max_depth", p.max_depth);
    p.features_per_split = doc.value("features_per_split", p.features_per_split);
    p.min_samples_split = doc.value("min_samples_split", p.min_samples_split);
    p.seed = doc.value("seed", p.seed);
    return p;
}

nlohmann::json RandomForest::to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& t : trees) arr.push_back(t.to_json());
    return {{"classes", classes}, {"features", features}, {"trees", arr}};
}

RandomForest RandomForest::from_json(const nlohmann::json& doc) {
    RandomForest f;
    f.classes = doc.at("classes").get<int>();
    f.features = doc.at("features").get<int>();
    for (const auto& t : doc.at("trees")) f.trees.push_back(DecisionTree::from_json(t));
    if (f.trees.empty()) throw DataError("model file: forest without trees");
    return f;
}

std::vector<double> bootstrap_weights(int rows, Rng& rng) {
    std::vector<double> w(rows, 0.0);
    std::uniform_int_distribution<int> pick(0, rows - 1);
    for (int i = 0; i < rows; ++i) w[pick(rng)] += 1.0;
    return w;
}

RandomForest train_random_forest(const Eigen::MatrixXd& X, const std::vector<int>& y, int classes,
                                 const ForestParams& params, Execution exec) {
    if (params.trees < 1) throw UsageError("random forest needs at least one tree");
    if (static_cast<int>(y.size()) != X.rows() || X.rows() == 0)
        throw UsageError("random forest: label count does not match the feature rows");
    std::vector<int> seen(classes, 0);
    for (int c : y) {
        if (c < 0 || c >= classes) throw UsageError("random forest: label outside [0, classes)");
        seen[c] = 1;
    }
    int distinct = 0;
    for (int s : seen) distinct += s;
    if (distinct < 2) throw DataError("random forest: training data holds a single class");

    const Presorted data(X);
    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.min_samples_split = params.min_samples_split;
    tp.features_per_split = params.features_per_split > 0
                                ? params.features_per_split
                                : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(X.cols()))));

    RandomForest forest;
    forest.classes = classes;
    forest.features = static_cast<int>(X.cols());
    forest.trees.resize(params.trees);
    const int rows = static_cast<int>(X.rows());
    for_each_index(params.trees, exec, [&](int t) {
        Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
        const auto weight = bootstrap_weights(rows, rng);
        forest.trees[t] = grow_classification_tree(data, y, classes, weight, tp, rng);
    });
    return forest;
}

}  // namespace gridad::ml
