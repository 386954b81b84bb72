#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridad/dataset.hpp"
#include "gridad/ml/boosted_trees.hpp"
#include "gridad/ml/knn.hpp"
#include "gridad/ml/logistic.hpp"
#include "gridad/ml/random_forest.hpp"

namespace gridad::ml {

enum class ModelKind { RandomForest, BoostedTrees, Logistic, Knn };

std::string to_string(ModelKind kind);  // "rf", "gbt", "lr", "knn"
ModelKind model_kind_from_string(const std::string& text);

struct ModelParams {
    ForestParams rf;
    BoostParams gbt;
    LogisticParams lr;
    KnnParams knn;

    nlohmann::json to_json(ModelKind kind) const;
    static ModelParams from_json(ModelKind kind, const nlohmann::json& doc);
    void set_seed(std::uint64_t seed);
};

/// Predicts one label regardless of the input; stands in for an indicator
/// head whose training column holds a single value.
struct ConstantModel {
    int label = 0;
    int classes = 2;
};

struct ClassPrediction {
    int label = 0;
    Eigen::VectorXd scores;  // vote fractions (RF, KNN) or probabilities
};

/// A single-label model over a fixed input width.
class Classifier {
public:
    static Classifier train(ModelKind kind, const ModelParams& params, const Eigen::MatrixXd& X,
                            const std::vector<int>& y, int classes, Execution exec = Execution::Parallel);
    static Classifier constant(int label, int classes, int inputs);

    int inputs() const { return inputs_; }
    int classes() const { return classes_; }

    /// Throws DataError when x does not have inputs() entries.
    ClassPrediction predict(const Eigen::RowVectorXd& x) const;
    std::vector<int> predict_batch(const Eigen::MatrixXd& X, Execution exec = Execution::Parallel) const;

    const auto& model() const { return model_; }

    nlohmann::json to_json() const;
    static Classifier from_json(const nlohmann::json& doc);

private:
    std::variant<RandomForest, BoostedTrees, LogisticModel, KnnModel, ConstantModel> model_;
    int inputs_ = 0;
    int classes_ = 0;
};

ClassPrediction predict_label(const Classifier& model, const Eigen::RowVectorXd& features);

/// What `train` persists: the kind, params, the dataset columns it reads and
/// one head (single-label) or one binary head per target (indicator data).
struct TrainedModel {
    ModelKind kind = ModelKind::RandomForest;
    ModelParams params;
    Task task = Task::Classify;
    int schema_features = 0;          // n_x of the dataset it was trained on
    std::vector<int> feature_indices;  // columns fed to the heads
    bool indicators = false;
    std::vector<std::string> class_names;   // single-label
    std::vector<std::string> target_names;  // indicator heads
    std::vector<Classifier> heads;
    double train_seconds = 0.0;

    /// Rows of `dataset` restricted to feature_indices. Throws DataError when
    /// the dataset schema does not match.
    Eigen::MatrixXd inputs(const Dataset& dataset, const std::vector<int>& rows) const;
    std::vector<int> predict(const Dataset& dataset, const std::vector<int>& rows,
                             Execution exec = Execution::Parallel) const;
    Eigen::MatrixXi predict_indicators(const Dataset& dataset, const std::vector<int>& rows,
                                       Execution exec = Execution::Parallel) const;

    nlohmann::json to_json() const;
    static TrainedModel from_json(const nlohmann::json& doc);
};

/// Trains on the dataset's train split (all rows if none is assigned).
/// Empty `feature_indices` means every column. Records wall-clock seconds.
TrainedModel train_model(const Dataset& dataset, ModelKind kind, const ModelParams& params,
                         const std::vector<int>& feature_indices = {},
                         Execution exec = Execution::Parallel);

/// Same as train_model but on explicit rows.
TrainedModel train_model_on(const Dataset& dataset, const std::vector<int>& rows, ModelKind kind,
                            const ModelParams& params, const std::vector<int>& feature_indices,
                            Execution exec = Execution::Parallel);

struct Evaluation {
    double macro_f1 = 0.0;
    double accuracy = 0.0;  // exact-match for indicator data
    int samples = 0;
    std::vector<std::string> names;
    std::vector<double> per_class_f1;
};

Evaluation evaluate_model(const TrainedModel& model, const Dataset& dataset, const std::vector<int>& rows,
                          Execution exec = Execution::Parallel);

}  // namespace gridad::ml
