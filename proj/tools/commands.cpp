#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "gridad/batch.hpp"
#include "gridad/csv.hpp"
#include "gridad/dataset.hpp"
#include "gridad/error.hpp"
#include "gridad/ml/classifier.hpp"
#include "gridad/ml/metrics.hpp"
#include "gridad/ml/tuning.hpp"
#include "gridad/mrmr.hpp"
#include "gridad/rng.hpp"
#include "gridad/trace_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gridad::cli {

namespace {

json detection_json(const DetectionConfig& c) {
    return {{"chi2_probability", c.chi2_probability},
            {"gamma", c.gamma},
            {"lnr_tau", c.lnr_tau},
            {"alpha", c.fase.holt.alpha},
            {"beta", c.fase.holt.beta},
            {"process_noise", c.fase.process_noise},
            {"initial_covariance", c.fase.initial_covariance},
            {"wls_tolerance", c.wls.tolerance},
            {"wls_max_iterations", c.wls.max_iterations}};
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw DataError("cannot create directory '" + dir + "'");
}

std::string stem(const std::string& path) { return fs::path(path).stem().string(); }

bool is_trace_csv(const fs::path& p) {
    const auto name = p.filename().string();
    if (p.extension() != ".csv") return false;
    if (name.size() > 11 && name.ends_with(".report.csv")) return false;
    return fs::exists(sidecar_path(p.string()));
}

// Every input is read before any output is written, so a bad file leaves
// nothing behind.
std::vector<ScenarioTrace> load_traces(const std::vector<std::string>& paths) {
    std::vector<ScenarioTrace> traces;
    traces.reserve(paths.size());
    for (const auto& p : paths) traces.push_back(read_trace(p));
    return traces;
}

json traces_json(const std::vector<std::string>& paths) {
    auto arr = json::array();
    for (const auto& p : paths) arr.push_back(fs::path(p).filename().string());
    return arr;
}

void write_json(const std::string& path, const json& doc) { write_text_file(path, doc.dump(2) + "\n"); }

std::string percent(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// A relative topology path in a scenario file is taken from the file's folder.
json anchor_topology(json doc, const std::string& scenario_path) {
    if (doc.contains("topology") && doc["topology"].is_string()) {
        const auto t = doc["topology"].get<std::string>();
        const fs::path rel = fs::path(scenario_path).parent_path() / t;
        if (t != "base" && fs::path(t).is_relative() && fs::exists(rel)) doc["topology"] = rel.string();
    }
    return doc;
}

}  // namespace

std::vector<std::string> expand_trace_paths(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<std::string> found;
            for (const auto& e : fs::directory_iterator(in))
                if (e.is_regular_file() && is_trace_csv(e.path())) found.push_back(e.path().string());
            std::sort(found.begin(), found.end());
            if (found.empty()) throw DataError("no traces in '" + in + "'");
            out.insert(out.end(), found.begin(), found.end());
        } else {
            if (!fs::exists(in)) throw DataError("cannot open '" + in + "'");
            out.push_back(in);
        }
    }
    if (out.empty()) throw UsageError("no trace files given");
    return out;
}

int run_simulate(const SimulateOptions& o) {
    if (o.scenario.empty() == o.grid.empty()) throw UsageError("give exactly one of --scenario or --grid");
    std::vector<ScenarioConfig> configs;
    json source;
    if (!o.scenario.empty()) {
        json doc = anchor_topology(read_json_file(o.scenario), o.scenario);
        doc["seed"] = o.seed;
        if (!doc.contains("name")) doc["name"] = stem(o.scenario);
        configs.push_back(ScenarioConfig::from_json(doc));
        source = {{"scenario", doc}};
    } else {
        const json grid = read_json_file(o.grid);
        configs = expand_grid(grid, o.seed);
        source = {{"grid", grid}, {"seed", o.seed}};
    }
    const auto traces = simulate_batch(configs);

    ensure_dir(o.out_dir);
    auto files = json::array();
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto name = configs[i].name.empty() ? "trace-" + std::to_string(i) : configs[i].name;
        const auto path = (fs::path(o.out_dir) / (name + ".csv")).string();
        write_trace(traces[i], path, configs[i].to_json());
        files.push_back({{"file", name + ".csv"},
                         {"topology_id", traces[i].topology_id},
                         {"seed", traces[i].seed}});
    }
    write_json((fs::path(o.out_dir) / "manifest.json").string(),
               {{"source", source}, {"config_hash", hash_hex(config_hash(source))}, {"traces", files}});
    std::cout << "wrote " << traces.size() << " trace(s) to " << o.out_dir << "\n";
    return 0;
}

int run_detect(const DetectOptions& o) {
    const auto paths = expand_trace_paths(o.traces);
    const auto traces = load_traces(paths);
    const auto reports = detect_batch(traces, o.config);

    ensure_dir(o.out_dir);
    const json cfg = detection_json(o.config);
    int normal = 0, alarms = 0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const json provenance{{"detection", cfg}, {"trace", fs::path(paths[i]).filename().string()}};
        const auto out = (fs::path(o.out_dir) / (stem(paths[i]) + ".report.csv")).string();
        write_report_csv(reports[i], out, provenance_line(provenance, traces[i].seed));

        const auto summary = summarize(traces[i], reports[i]);
        normal += summary.normal_steps;
        alarms += summary.false_alarms;
        std::cout << stem(paths[i]) << ":";
        for (const auto& onset : summary.onsets) {
            const auto& spec = traces[i].specs[onset.spec];
            std::cout << " " << to_string(spec.kind) << "@" << onset.onset << " delay="
                      << (onset.delay < 0 ? std::string("missed") : std::to_string(onset.delay));
        }
        std::cout << " false-alarm-rate=" << percent(100.0 * summary.false_alarm_rate()) << "%\n";
    }
    const double rate = normal == 0 ? 0.0 : 100.0 * alarms / normal;
    std::cout << "overall false-alarm rate " << percent(rate) << "% (" << alarms << "/" << normal
              << " normal steps)\n";
    return 0;
}

int run_build_dataset(const BuildDatasetOptions& o) {
    const Task task = task_from_string(o.task);
    if (o.split != "stratified" && o.split != "holdout")
        throw UsageError("--split must be 'stratified' or 'holdout'");
    if (o.split == "stratified" && !(o.fraction > 0.0 && o.fraction < 1.0))
        throw UsageError("--fraction must lie in (0, 1)");
    const auto paths = expand_trace_paths(o.traces);
    const auto traces = load_traces(paths);
    const auto reports = detect_batch(traces, o.config);

    AssemblyStats stats;
    Dataset ds = assemble_dataset(traces, reports, task, &stats);
    if (o.min_class_count > 0) {
        std::vector<std::string> dropped;
        ds = drop_rare_classes(ds, o.min_class_count, &dropped);
        for (const auto& name : dropped) std::cout << "dropped class " << name << " (too few samples)\n";
    }
    if (o.balance) ds = balance_classes(ds, derive_seed(o.seed, 1));
    if (o.split == "stratified")
        stratified_split(ds, o.fraction, derive_seed(o.seed, 2));
    else
        topology_holdout_split(ds, o.train_topologies);
    ds.seed = o.seed;

    const json config{{"task", o.task},
                      {"split", o.split},
                      {"fraction", o.fraction},
                      {"train_topologies", o.train_topologies},
                      {"balance", o.balance},
                      {"min_class_count", o.min_class_count},
                      {"seed", o.seed},
                      {"detection", detection_json(o.config)},
                      {"traces", traces_json(paths)}};
    if (const auto dir = fs::path(o.out).parent_path(); !dir.empty()) ensure_dir(dir.string());
    write_dataset(ds, o.out, config);

    std::cout << "flagged " << stats.flagged << ", used " << stats.used << ", false alarms dropped "
              << stats.false_alarms << ", off-task dropped " << stats.off_task << "\n";
    std::cout << "samples " << ds.size() << " (train " << ds.rows(Split::Train).size() << ", test "
              << ds.rows(Split::Test).size() << "), features " << ds.feature_count() << "\n";
    return 0;
}

int run_select_features(const SelectOptions& o) {
    const Dataset ds = read_dataset(o.dataset);
    if (o.k < 1 || o.k > ds.feature_count())
        throw UsageError("--k must lie in [1, " + std::to_string(ds.feature_count()) + "]");
    const auto sel = mrmr_select(ds, o.k);
    json doc = sel.to_json();
    auto names = json::array();
    for (int j : sel.indices) names.push_back(ds.feature_names[j]);
    doc["names"] = names;
    doc["schema_features"] = ds.feature_count();
    const json config{{"dataset", fs::path(o.dataset).filename().string()}, {"k", o.k}};
    doc["config"] = config;
    doc["config_hash"] = hash_hex(config_hash(config));
    write_json(o.out, doc);
    std::cout << "selected " << o.k << " of " << ds.feature_count() << " features; first: "
              << ds.feature_names[sel.indices.front()] << "\n";
    return 0;
}

namespace {

std::vector<int> selection_indices(const std::string& path, const Dataset& ds) {
    if (path.empty()) return {};
    const json doc = read_json_file(path);
    const auto sel = SelectionResult::from_json(doc);
    const int schema = doc.value("schema_features", static_cast<int>(sel.relevance.size()));
    if (schema != ds.feature_count())
        throw DataError("selection '" + path + "' was made on " + std::to_string(schema) +
                        " features but the dataset has " + std::to_string(ds.feature_count()));
    return sel.indices;
}

json evaluation_json(const ml::Evaluation& e) {
    json per = json::object();
    for (std::size_t c = 0; c < e.names.size(); ++c) per[e.names[c]] = e.per_class_f1[c];
    return {{"macro_f1", e.macro_f1}, {"accuracy", e.accuracy}, {"test_samples", e.samples},
            {"per_class_f1", per}};
}

// Window-level view: every test trace gets the majority predicted label of
// its flagged steps (lower class index on ties).
json trace_vote(const ml::TrainedModel& model, const Dataset& ds, const std::vector<int>& rows) {
    if (model.indicators) return nullptr;
    const auto pred = model.predict(ds, rows);
    std::map<std::pair<int, int>, std::vector<int>> votes;
    std::map<std::pair<int, int>, int> truth;
    const int classes = static_cast<int>(ds.class_names.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto key = std::make_pair(ds.topology[rows[i]], ds.trace[rows[i]]);
        auto& v = votes[key];
        if (v.empty()) v.assign(classes, 0);
        ++v[pred[i]];
        truth[key] = ds.labels[rows[i]];
    }
    std::vector<int> y, p;
    for (const auto& [key, v] : votes) {
        y.push_back(truth[key]);
        p.push_back(static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin()));
    }
    return {{"traces", static_cast<int>(y.size())}, {"macro_f1", ml::macro_f1(y, p, classes)}};
}

}  // namespace

int run_train(const TrainOptions& o) {
    const Dataset ds = read_dataset(o.dataset);
    const auto kind = ml::model_kind_from_string(o.model);
    const auto indices = selection_indices(o.selection, ds);
    const auto test = ds.rows(Split::Test);
    if (test.empty()) throw DataError("dataset '" + o.dataset + "' has no test split");

    json overrides = json::object();
    if (!o.params.empty()) {
        try {
            overrides = json::parse(o.params);
        } catch (const json::exception& e) {
            throw UsageError(std::string("--params: ") + e.what());
        }
    }
    auto params = ml::ModelParams::from_json(kind, overrides);
    json tuning = nullptr;
    if (o.tune_budget > 0) {
        const auto result =
            ml::tune_hyperparameters(ds, kind, o.tune_budget, derive_seed(o.seed, 1), indices);
        params = result.best;
        tuning = {{"budget", o.tune_budget}, {"cv_macro_f1", result.cv_macro_f1}};
    }
    params.set_seed(o.seed);

    const auto model = ml::train_model(ds, kind, params, indices);
    const auto eval = ml::evaluate_model(model, ds, test);

    const json config{{"dataset", fs::path(o.dataset).filename().string()},
                      {"model", o.model},
                      {"selection", o.selection.empty() ? json(nullptr)
                                                        : json(fs::path(o.selection).filename().string())},
                      {"params", params.to_json(kind)},
                      {"tune_budget", o.tune_budget},
                      {"seed", o.seed}};
    json model_doc = model.to_json();
    model_doc["config"] = config;
    model_doc["config_hash"] = hash_hex(config_hash(config));
    write_json(o.model_out, model_doc);

    json metrics{{"model", ml::to_string(kind)},
                 {"task", to_string(ds.task)},
                 {"k_features", indices.empty() ? ds.feature_count() : static_cast<int>(indices.size())},
                 {"train_seconds", model.train_seconds},
                 {"seed", o.seed},
                 {"params", params.to_json(kind)},
                 {"config_hash", hash_hex(config_hash(config))}};
    metrics.update(evaluation_json(eval));
    if (!tuning.is_null()) metrics["tuning"] = tuning;
    if (auto vote = trace_vote(model, ds, test); !vote.is_null()) metrics["trace_vote"] = vote;
    if (!o.metrics_out.empty()) write_json(o.metrics_out, metrics);

    std::cout << ml::to_string(kind) << ": macro-F1 " << percent(eval.macro_f1) << "% on "
              << eval.samples << " test samples, " << metrics["k_features"].get<int>()
              << " features, trained in " << percent(model.train_seconds) << " s\n";
    return 0;
}

int run_evaluate(const EvaluateOptions& o) {
    const Dataset ds = read_dataset(o.dataset);
    const auto model = ml::TrainedModel::from_json(read_json_file(o.model_file));
    if (model.schema_features != ds.feature_count())
        throw DataError("model was trained on " + std::to_string(model.schema_features) +
                        " features but the dataset has " + std::to_string(ds.feature_count()));
    auto rows = ds.rows(Split::Test);
    if (rows.empty()) rows = ds.rows(Split::Unassigned);
    if (rows.empty()) throw DataError("dataset '" + o.dataset + "' has no test rows");
    const auto eval = ml::evaluate_model(model, ds, rows);

    json metrics{{"model", ml::to_string(model.kind)},
                 {"task", to_string(ds.task)},
                 {"k_features", static_cast<int>(model.feature_indices.size())}};
    metrics.update(evaluation_json(eval));
    if (auto vote = trace_vote(model, ds, rows); !vote.is_null()) metrics["trace_vote"] = vote;
    if (!o.metrics_out.empty()) write_json(o.metrics_out, metrics);
    std::cout << ml::to_string(model.kind) << ": macro-F1 " << percent(eval.macro_f1) << "% on "
              << eval.samples << " samples\n";
    return 0;
}

int run_calibrate_gamma(const CalibrateOptions& o) {
    if (!(o.gamma_step > 0.0) || o.gamma_max < o.gamma_min) throw UsageError("bad gamma range");
    if (o.window < 0) throw UsageError("--window must be non-negative");
    const auto paths = expand_trace_paths(o.traces);
    const auto traces = load_traces(paths);
    const auto reports = detect_batch(traces, o.config);

    // ADI on clean steps, and each SLC/FDIA event's peak ADI within the
    // window after onset. The verdict threshold does not affect either.
    std::vector<double> clean;
    std::vector<double> peaks;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& steps = reports[i].steps;
        for (std::size_t t = 0; t < steps.size(); ++t)
            if (traces[i].steps[t].label.normal() && steps[t].ekf_ran) clean.push_back(steps[t].max_adi);
        for (const auto& spec : traces[i].specs) {
            if (spec.kind == AnomalyKind::BadData) continue;
            double peak = 0.0;
            const int end = std::min<int>(spec.onset + o.window + 1, static_cast<int>(steps.size()));
            for (int t = spec.onset; t < end; ++t) peak = std::max(peak, steps[t].max_adi);
            peaks.push_back(peak);
        }
    }
    const double clean_max = clean.empty() ? 0.0 : *std::max_element(clean.begin(), clean.end());
    const double peak_min = peaks.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : *std::min_element(peaks.begin(), peaks.end());

    json config = detection_json(o.config);
    config["gamma_range"] = {o.gamma_min, o.gamma_max, o.gamma_step};
    config["window"] = o.window;
    config["traces"] = traces_json(paths);
    if (const auto dir = fs::path(o.out).parent_path(); !dir.empty()) ensure_dir(dir.string());
    CsvWriter csv(o.out);
    csv.comment(provenance_line(config, 0));
    csv.row({"gamma", "false_alarm_rate", "detection_rate", "clean_margin", "anomaly_margin"});
    const int count = static_cast<int>(std::floor((o.gamma_max - o.gamma_min) / o.gamma_step + 1e-9)) + 1;
    for (int k = 0; k < count; ++k) {
        const double g = o.gamma_min + k * o.gamma_step;
        const auto fa = std::count_if(clean.begin(), clean.end(), [g](double a) { return a >= g; });
        const auto hit = std::count_if(peaks.begin(), peaks.end(), [g](double a) { return a >= g; });
        csv.row({format_number(g),
                 format_number(clean.empty() ? 0.0 : static_cast<double>(fa) / clean.size()),
                 format_number(peaks.empty() ? 0.0 : static_cast<double>(hit) / peaks.size()),
                 format_number(g - clean_max), format_number(peak_min - g)});
    }
    csv.close();
    std::cout << "clean max ADI " << format_number(clean_max) << " over " << clean.size()
              << " steps; weakest event peak " << format_number(peak_min) << " over " << peaks.size()
              << " events; separation " << format_number(peak_min - clean_max) << "\n";
    return 0;
}

}  // namespace gridad::cli
