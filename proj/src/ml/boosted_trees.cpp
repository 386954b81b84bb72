#include "gridad/ml/boosted_trees.hpp"

#include <algorithm>
#include <cmath>

#include "gridad/error.hpp"

namespace gridad::ml {

nlohmann::json BoostParams::to_json() const {
    return {{"trees", trees}, {"max_depth", max_depth}, {"rate", rate},
            {"lambda", lambda}, {"gamma", gamma}, {"min_child_weight", min_child_weight},
            {"subsample", subsample}, {"seed", seed}};
}

BoostParams BoostParams::from_json(const nlohmann::json& doc) {
    BoostParams p;
    p.trees = doc.value("trees", p.trees);
    p.max_depth = doc.value("max_depth", p.max_depth);
    p.rate = doc.value("rate", p.rate);
    p.lambda = doc.value("lambda", p.lambda);
    p.gamma = doc.value("gamma", p.gamma);
    p.min_child_weight = doc.value("min_child_weight", p.min_child_weight);
    p.subsample = doc.value("subsample", p.subsample);
    p.seed = doc.value("seed", p.seed);
    return p;
}

double sigmoid(double m) {
    if (m >= 0.0) return 1.0 / (1.0 + std::exp(-m));
    const double e = std::exp(m);
    return e / (1.0 + e);
}

namespace {

double logistic_loss(const std::vector<double>& margin, const std::vector<int>& y) {
    double loss = 0.0;
    for (std::size_t i = 0; i < margin.size(); ++i) {
        const double m = y[i] ? margin[i] : -margin[i];
        // log(1 + e^-m) without overflow
        loss += m > 0.0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
    }
    return loss / static_cast<double>(margin.size());
}

}  // namespace

BinaryBooster train_binary_booster(const Presorted& data, const std::vector<int>& target,
                                   const BoostParams& params, std::uint64_t seed) {
    const int n = data.rows();
    const Eigen::MatrixXd& X = data.data();
    double pos = 0.0;
    for (int v : target) pos += v;
    const double prior = std::clamp(pos / n, 1e-6, 1.0 - 1e-6);

    BinaryBooster b;
    b.rate = params.rate;
    b.init = std::log(prior / (1.0 - prior));
    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.lambda = params.lambda;
    tp.gamma = params.gamma;
    tp.min_child_weight = params.min_child_weight;
    tp.min_samples_split = 2.0;

    std::vector<double> margin(n, b.init), g(n), h(n), weight(n, 1.0);
    Rng rng(seed);
    std::bernoulli_distribution keep(std::clamp(params.subsample, 0.0, 1.0));
    for (int stage = 0; stage < params.trees; ++stage) {
        for (int i = 0; i < n; ++i) {
            const double p = sigmoid(margin[i]);
            g[i] = p - target[i];
            h[i] = std::max(p * (1.0 - p), 1e-16);
        }
        if (params.subsample < 1.0)
            for (int i = 0; i < n; ++i) weight[i] = keep(rng) ? 1.0 : 0.0;
        b.trees.push_back(grow_boosting_tree(data, g, h, weight, tp, rng));
        const auto& tree = b.trees.back();
        for (int i = 0; i < n; ++i) {
            margin[i] += params.rate * tree.leaf(X.row(i)).value[0];
            if (!std::isfinite(margin[i]))
                throw NumericalError("boosting produced a non-finite margin at stage " + std::to_string(stage));
        }
        b.loss_history.push_back(logistic_loss(margin, target));
    }
    return b;
}

nlohmann::json BoostedTrees::to_json() const {
    auto arr = nlohmann::json::array();
    for (const auto& b : boosters) {
        auto trees = nlohmann::json::array();
        for (const auto& t : b.trees) trees.push_back(t.to_json());
        arr.push_back({{"init", b.init}, {"rate", b.rate}, {"trees", trees}});
    }
    return {{"classes", classes}, {"features", features}, {"boosters", arr}};
}

BoostedTrees BoostedTrees::from_json(const nlohmann::json& doc) {
    BoostedTrees m;
    m.classes = doc.at("classes").get<int>();
    m.features = doc.at("features").get<int>();
    for (const auto& b : doc.at("boosters")) {
        BinaryBooster bb;
        bb.init = b.at("init").get<double>();
        bb.rate = b.at("rate").get<double>();
        for (const auto& t : b.at("trees")) bb.trees.push_back(DecisionTree::from_json(t));
        m.boosters.push_back(std::move(bb));
    }
    const std::size_t want = m.classes == 2 ? 1u : static_cast<std::size_t>(m.classes);
    if (m.boosters.size() != want) throw DataError("model file: booster count does not match classes");
    return m;
}

BoostedTrees train_gradient_boosted_trees(const Eigen::MatrixXd& X, const std::vector<int>& y,
                                          int classes, const BoostParams& params, Execution exec) {
    if (params.trees < 1) throw UsageError("boosting needs at least one stage");
    if (static_cast<int>(y.size()) != X.rows() || X.rows() == 0)
        throw UsageError("boosting: label count does not match the feature rows");
    std::vector<int> seen(classes, 0);
    for (int c : y) {
        if (c < 0 || c >= classes) throw UsageError("boosting: label outside [0, classes)");
        seen[c] = 1;
    }
    int distinct = 0;
    for (int s : seen) distinct += s;
    if (distinct < 2) throw DataError("boosting: training data holds a single class");

    const Presorted data(X);
    BoostedTrees model;
    model.classes = classes;
    model.features = static_cast<int>(X.cols());
    const int heads = classes == 2 ? 1 : classes;
    model.boosters.resize(heads);
    for_each_index(heads, exec, [&](int c) {
        const int positive = classes == 2 ? 1 : c;
        std::vector<int> target(y.size());
        for (std::size_t i = 0; i < y.size(); ++i) target[i] = y[i] == positive;
        model.boosters[c] = train_binary_booster(data, target, params, derive_seed(params.seed, c));
    });
    return model;
}

}  // namespace gridad::ml
