#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridad/detection.hpp"

namespace gridad::cli {

struct SimulateOptions {
    std::string scenario;  // single scenario config
    std::string grid;      // or a batch grid
    std::string out_dir;
    std::uint64_t seed = 0;
};

struct DetectOptions {
    std::vector<std::string> traces;
    std::string out_dir;
    DetectionConfig config;
};

struct BuildDatasetOptions {
    std::vector<std::string> traces;
    std::string task = "classify";
    std::string split = "stratified";
    double fraction = 0.8;
    std::vector<int> train_topologies{0, 1, 2};
    bool balance = false;
    int min_class_count = 0;
    std::uint64_t seed = 0;
    std::string out;
    DetectionConfig config;
};

struct SelectOptions {
    std::string dataset;
    int k = 70;
    std::string out;
};

struct TrainOptions {
    std::string dataset;
    std::string model = "rf";
    std::string selection;
    std::string params;  // inline JSON overrides
    int tune_budget = 0;
    std::uint64_t seed = 0;
    std::string model_out;
    std::string metrics_out;
};

struct EvaluateOptions {
    std::string dataset;
    std::string model_file;
    std::string metrics_out;
};

struct CalibrateOptions {
    std::vector<std::string> traces;
    double gamma_min = 2.0;
    double gamma_max = 12.0;
    double gamma_step = 0.5;
    int window = 2;
    std::string out;
    DetectionConfig config;
};

int run_simulate(const SimulateOptions& o);
int run_detect(const DetectOptions& o);
int run_build_dataset(const BuildDatasetOptions& o);
int run_select_features(const SelectOptions& o);
int run_train(const TrainOptions& o);
int run_evaluate(const EvaluateOptions& o);
int run_calibrate_gamma(const CalibrateOptions& o);

/// Trace CSVs named directly or found in listed directories (report and
/// dataset files excluded), in sorted order.
std::vector<std::string> expand_trace_paths(const std::vector<std::string>& inputs);

}  // namespace gridad::cli
