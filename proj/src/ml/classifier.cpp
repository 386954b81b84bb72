#include "gridad/ml/classifier.hpp"

#include <chrono>
#include <numeric>

#include "gridad/error.hpp"
#include "gridad/ml/metrics.hpp"

namespace gridad::ml {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::RandomForest: return "rf";
        case ModelKind::BoostedTrees: return "gbt";
        case ModelKind::Logistic: return "lr";
        case ModelKind::Knn: return "knn";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& text) {
    if (text == "rf") return ModelKind::RandomForest;
    if (text == "gbt" || text == "xgb") return ModelKind::BoostedTrees;
    if (text == "lr") return ModelKind::Logistic;
    if (text == "knn") return ModelKind::Knn;
    throw UsageError("unknown model kind '" + text + "' (rf, gbt, lr, knn)");
}

nlohmann::json ModelParams::to_json(ModelKind kind) const {
    switch (kind) {
        case ModelKind::RandomForest: return rf.to_json();
        case ModelKind::BoostedTrees: return gbt.to_json();
        case ModelKind::Logistic: return lr.to_json();
        case ModelKind::Knn: return knn.to_json();
    }
    return {};
}

ModelParams ModelParams::from_json(ModelKind kind, const nlohmann::json& doc) {
    ModelParams p;
    try {
        switch (kind) {
            case ModelKind::RandomForest: p.rf = ForestParams::from_json(doc); break;
            case ModelKind::BoostedTrees: p.gbt = BoostParams::from_json(doc); break;
            case ModelKind::Logistic: p.lr = LogisticParams::from_json(doc); break;
            case ModelKind::Knn: p.knn = KnnParams::from_json(doc); break;
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("model params: ") + e.what());
    }
    return p;
}

void ModelParams::set_seed(std::uint64_t seed) {
    rf.seed = seed;
    gbt.seed = seed;
}

Classifier Classifier::train(ModelKind kind, const ModelParams& params, const Eigen::MatrixXd& X,
                             const std::vector<int>& y, int classes, Execution exec) {
    Classifier c;
    c.inputs_ = static_cast<int>(X.cols());
    c.classes_ = classes;
    switch (kind) {
        case ModelKind::RandomForest: c.model_ = train_random_forest(X, y, classes, params.rf, exec); break;
        case ModelKind::BoostedTrees:
            c.model_ = train_gradient_boosted_trees(X, y, classes, params.gbt, exec);
            break;
        case ModelKind::Logistic: c.model_ = train_logistic_regression(X, y, classes, params.lr); break;
        case ModelKind::Knn: c.model_ = train_knn(X, y, classes, params.knn); break;
    }
    return c;
}

Classifier Classifier::constant(int label, int classes, int inputs) {
    Classifier c;
    c.model_ = ConstantModel{label, classes};
    c.inputs_ = inputs;
    c.classes_ = classes;
    return c;
}

namespace {

int argmax(const Eigen::VectorXd& v) {
    Eigen::Index i = 0;
    v.maxCoeff(&i);
    return static_cast<int>(i);
}

}  // namespace

ClassPrediction Classifier::predict(const Eigen::RowVectorXd& x) const {
    if (x.size() != inputs_)
        throw DataError("model expects " + std::to_string(inputs_) + " features, got " + std::to_string(x.size()));
    ClassPrediction out;
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, RandomForest>) {
                out.scores = m.votes(x);
                out.label = argmax(out.scores);
            } else if constexpr (std::is_same_v<M, BoostedTrees>) {
                out.scores = m.scores(x);
                out.label = argmax(out.scores);
            } else if constexpr (std::is_same_v<M, LogisticModel>) {
                out.scores = m.scores(x);
                out.label = argmax(out.scores);
            } else if constexpr (std::is_same_v<M, KnnModel>) {
                out.scores = m.scores(x);
                out.label = m.predict(x);
            } else {
                out.scores = Eigen::VectorXd::Zero(m.classes);
                out.scores[m.label] = 1.0;
                out.label = m.label;
            }
        },
        model_);
    return out;
}

std::vector<int> Classifier::predict_batch(const Eigen::MatrixXd& X, Execution exec) const {
    std::vector<int> out(X.rows());
    for_each_index(static_cast<int>(X.rows()), exec, [&](int i) { out[i] = predict(X.row(i)).label; });
    return out;
}

nlohmann::json Classifier::to_json() const {
    nlohmann::json doc{{"inputs", inputs_}, {"classes", classes_}};
    std::visit(
        [&](const auto& m) {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, RandomForest>) {
                doc["kind"] = "rf";
                doc["model"] = m.to_json();
            } else if constexpr (std::is_same_v<M, BoostedTrees>) {
                doc["kind"] = "gbt";
                doc["model"] = m.to_json();
            } else if constexpr (std::is_same_v<M, LogisticModel>) {
                doc["kind"] = "lr";
                doc["model"] = m.to_json();
            } else if constexpr (std::is_same_v<M, KnnModel>) {
                doc["kind"] = "knn";
                doc["model"] = m.to_json();
            } else {
                doc["kind"] = "constant";
                doc["model"] = {{"label", m.label}};
            }
        },
        model_);
    return doc;
}

Classifier Classifier::from_json(const nlohmann::json& doc) {
    Classifier c;
    c.inputs_ = doc.at("inputs").get<int>();
    c.classes_ = doc.at("classes").get<int>();
    const auto kind = doc.at("kind").get<std::string>();
    const auto& m = doc.at("model");
    if (kind == "rf") c.model_ = RandomForest::from_json(m);
    else if (kind == "gbt") c.model_ = BoostedTrees::from_json(m);
    else if (kind == "lr") c.model_ = LogisticModel::from_json(m);
    else if (kind == "knn") c.model_ = KnnModel::from_json(m);
    else if (kind == "constant") c.model_ = ConstantModel{m.at("label").get<int>(), c.classes_};
    else throw DataError("model file: unknown head kind '" + kind + "'");
    return c;
}

ClassPrediction predict_label(const Classifier& model, const Eigen::RowVectorXd& features) {
    return model.predict(features);
}

Eigen::MatrixXd TrainedModel::inputs(const Dataset& dataset, const std::vector<int>& rows) const {
    if (dataset.feature_count() != schema_features)
        throw DataError("model was trained on " + std::to_string(schema_features) +
                        "-feature data; dataset has " + std::to_string(dataset.feature_count()));
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feature_indices.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < feature_indices.size(); ++j)
            X(i, j) = dataset.features(rows[i], feature_indices[j]);
    return X;
}

std::vector<int> TrainedModel::predict(const Dataset& dataset, const std::vector<int>& rows, Execution exec) const {
    if (indicators) throw UsageError("indicator model: use predict_indicators");
    return heads.at(0).predict_batch(inputs(dataset, rows), exec);
}

Eigen::MatrixXi TrainedModel::predict_indicators(const Dataset& dataset, const std::vector<int>& rows,
                                                 Execution exec) const {
    if (!indicators) throw UsageError("single-label model: use predict");
    const Eigen::MatrixXd X = inputs(dataset, rows);
    Eigen::MatrixXi out(X.rows(), static_cast<Eigen::Index>(heads.size()));
    for (std::size_t j = 0; j < heads.size(); ++j) {
        const auto col = heads[j].predict_batch(X, exec);
        for (int i = 0; i < X.rows(); ++i) out(i, static_cast<Eigen::Index>(j)) = col[i];
    }
    return out;
}

nlohmann::json TrainedModel::to_json() const {
    auto hs = nlohmann::json::array();
    for (const auto& h : heads) hs.push_back(h.to_json());
    return {{"format", "gridad-model/1"},
            {"kind", to_string(kind)},
            {"params", params.to_json(kind)},
            {"task", gridad::to_string(task)},
            {"schema_features", schema_features},
            {"feature_indices", feature_indices},
            {"indicators", indicators},
            {"classes", class_names},
            {"targets", target_names},
            {"train_seconds", train_seconds},
            {"heads", hs}};
}

TrainedModel TrainedModel::from_json(const nlohmann::json& doc) {
    TrainedModel m;
    try {
        if (doc.value("format", std::string()) != "gridad-model/1")
            throw DataError("model file: unsupported format '" + doc.value("format", std::string()) + "'");
        m.kind = model_kind_from_string(doc.at("kind").get<std::string>());
        m.params = ModelParams::from_json(m.kind, doc.at("params"));
        m.task = task_from_string(doc.at("task").get<std::string>());
        m.schema_features = doc.at("schema_features").get<int>();
        m.feature_indices = doc.at("feature_indices").get<std::vector<int>>();
        m.indicators = doc.at("indicators").get<bool>();
        m.class_names = doc.at("classes").get<std::vector<std::string>>();
        m.target_names = doc.at("targets").get<std::vector<std::string>>();
        m.train_seconds = doc.value("train_seconds", 0.0);
        for (const auto& h : doc.at("heads")) m.heads.push_back(Classifier::from_json(h));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model file: ") + e.what());
    } catch (const UsageError& e) {
        throw DataError(std::string("model file: ") + e.what());
    }
    if (m.heads.empty()) throw DataError("model file: no heads");
    for (const auto& h : m.heads)
        if (h.inputs() != static_cast<int>(m.feature_indices.size()))
            throw DataError("model file: head width does not match feature_indices");
    return m;
}

TrainedModel train_model_on(const Dataset& dataset, const std::vector<int>& rows, ModelKind kind,
                            const ModelParams& params, const std::vector<int>& feature_indices,
                            Execution exec) {
    TrainedModel m;
    m.kind = kind;
    m.params = params;
    m.task = dataset.task;
    m.schema_features = dataset.feature_count();
    m.feature_indices = feature_indices;
    if (m.feature_indices.empty()) {
        m.feature_indices.resize(dataset.feature_count());
        std::iota(m.feature_indices.begin(), m.feature_indices.end(), 0);
    }
    for (int f : m.feature_indices)
        if (f < 0 || f >= dataset.feature_count())
            throw DataError("feature index " + std::to_string(f) + " outside the dataset schema");
    if (rows.empty()) throw DataError("no training rows");
    m.indicators = dataset.multi_label();
    m.class_names = dataset.class_names;
    m.target_names = dataset.target_names;

    const Eigen::MatrixXd X = m.inputs(dataset, rows);
    const auto start = std::chrono::steady_clock::now();
    if (!m.indicators) {
        std::vector<int> y(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) y[i] = dataset.labels[rows[i]];
        m.heads.push_back(Classifier::train(kind, params, X, y, static_cast<int>(dataset.class_names.size()), exec));
    } else {
        for (int j = 0; j < dataset.origins.cols(); ++j) {
            std::vector<int> y(rows.size());
            int pos = 0;
            for (std::size_t i = 0; i < rows.size(); ++i) pos += (y[i] = dataset.origins(rows[i], j));
            if (pos == 0 || pos == static_cast<int>(rows.size())) {
                m.heads.push_back(Classifier::constant(pos == 0 ? 0 : 1, 2, static_cast<int>(X.cols())));
                continue;
            }
            ModelParams head = params;
            head.set_seed(derive_seed(params.rf.seed, static_cast<std::uint64_t>(j)));
            m.heads.push_back(Classifier::train(kind, head, X, y, 2, exec));
        }
    }
    m.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return m;
}

TrainedModel train_model(const Dataset& dataset, ModelKind kind, const ModelParams& params,
                         const std::vector<int>& feature_indices, Execution exec) {
    auto rows = dataset.rows(Split::Train);
    if (rows.empty()) {
        rows.resize(dataset.size());
        std::iota(rows.begin(), rows.end(), 0);
    }
    return train_model_on(dataset, rows, kind, params, feature_indices, exec);
}

Evaluation evaluate_model(const TrainedModel& model, const Dataset& dataset, const std::vector<int>& rows,
                          Execution exec) {
    if (rows.empty()) throw DataError("no rows to evaluate");
    if (model.indicators != dataset.multi_label())
        throw DataError("model and dataset disagree on single-label versus indicator targets");
    Evaluation ev;
    ev.samples = static_cast<int>(rows.size());
    if (!model.indicators) {
        if (model.class_names != dataset.class_names)
            throw DataError("model classes do not match the dataset classes");
        const auto pred = model.predict(dataset, rows, exec);
        std::vector<int> truth(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) truth[i] = dataset.labels[rows[i]];
        const int classes = static_cast<int>(dataset.class_names.size());
        ev.macro_f1 = macro_f1(truth, pred, classes);
        ev.accuracy = accuracy(truth, pred);
        const auto counts = confusion_counts(truth, pred, classes);
        for (int c = 0; c < classes; ++c) {
            ev.names.push_back(dataset.class_names[c]);
            ev.per_class_f1.push_back(precision_recall_f1(counts, c).f1);
        }
        return ev;
    }
    if (model.target_names != dataset.target_names)
        throw DataError("model targets do not match the dataset targets");
    const Eigen::MatrixXi pred = model.predict_indicators(dataset, rows, exec);
    Eigen::MatrixXi truth(pred.rows(), pred.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) truth.row(static_cast<Eigen::Index>(i)) = dataset.origins.row(rows[i]);
    ev.macro_f1 = indicator_macro_f1(truth, pred);
    int exact = 0;
    for (int i = 0; i < truth.rows(); ++i) exact += truth.row(i) == pred.row(i);
    ev.accuracy = static_cast<double>(exact) / static_cast<double>(truth.rows());
    for (int j = 0; j < truth.cols(); ++j) {
        Eigen::MatrixXi t = truth.col(j), p = pred.col(j);
        ev.names.push_back(dataset.target_names[j]);
        const int any = t.sum() + p.sum();
        ev.per_class_f1.push_back(any > 0 ? indicator_macro_f1(t, p) : 0.0);
    }
    return ev;
}

}  // namespace gridad::ml
