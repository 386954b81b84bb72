#include "gridad/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "gridad/csv.hpp"
#include "gridad/error.hpp"
#include "gridad/features.hpp"
#include "gridad/rng.hpp"
#include "gridad/trace_io.hpp"

namespace gridad {

std::string to_string(Task task) {
    switch (task) {
        case Task::Classify: return "classify";
        case Task::IdentifySlc: return "identify-SLC";
        case Task::IdentifyFdia: return "identify-FDIA";
    }
    return "?";
}

Task task_from_string(const std::string& text) {
    if (text == "classify") return Task::Classify;
    if (text == "identify-SLC" || text == "identify-slc") return Task::IdentifySlc;
    if (text == "identify-FDIA" || text == "identify-fdia") return Task::IdentifyFdia;
    throw UsageError("unknown task '" + text + "' (classify, identify-SLC, identify-FDIA)");
}

bool Dataset::multi_label() const {
    return std::any_of(labels.begin(), labels.end(), [](int y) { return y < 0; });
}

std::vector<int> Dataset::rows(Split which) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
        if (split[i] == which) out.push_back(i);
    return out;
}

Dataset Dataset::select_features(const std::vector<int>& indices) const {
    Dataset out = *this;
    out.features.resize(size(), static_cast<Eigen::Index>(indices.size()));
    out.feature_names.clear();
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const int c = indices[j];
        if (c < 0 || c >= feature_count())
            throw UsageError("feature index " + std::to_string(c) + " outside the dataset schema (" +
                             std::to_string(feature_count()) + " features)");
        out.features.col(static_cast<Eigen::Index>(j)) = features.col(c);
        out.feature_names.push_back(feature_names[c]);
    }
    return out;
}

Dataset Dataset::subset(const std::vector<int>& rows) const {
    Dataset out = *this;
    const auto n = static_cast<Eigen::Index>(rows.size());
    out.features.resize(n, features.cols());
    out.origins.resize(n, origins.cols());
    out.labels.clear();
    out.topology.clear();
    out.trace.clear();
    out.step.clear();
    out.split.clear();
    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = rows[i];
        if (r < 0 || r >= size()) throw DataError("row " + std::to_string(r) + " outside the dataset");
        out.features.row(i) = features.row(r);
        if (origins.cols() > 0) out.origins.row(i) = origins.row(r);
        out.labels.push_back(labels[r]);
        out.topology.push_back(topology[r]);
        out.trace.push_back(trace[r]);
        out.step.push_back(step[r]);
        out.split.push_back(split[r]);
    }
    return out;
}

std::vector<int> Dataset::class_counts() const {
    if (multi_label()) {
        std::vector<int> out(target_names.size(), 0);
        for (int j = 0; j < origins.cols(); ++j) out[j] = origins.col(j).sum();
        return out;
    }
    std::vector<int> out(class_names.size(), 0);
    for (int y : labels) ++out.at(y);
    return out;
}

namespace {

struct RawSample {
    Eigen::VectorXd features;
    int kind = 0;  // 0 SLC, 1 FDIA
    std::vector<int> targets;
    int topology = 0;
    int trace = 0;
    int step = 0;
};

}  // namespace

Dataset assemble_dataset(const std::vector<ScenarioTrace>& traces,
                         const std::vector<DetectionReport>& reports, Task task,
                         AssemblyStats* stats) {
    if (traces.size() != reports.size())
        throw UsageError("assemble_dataset: one detection report per trace is required");
    AssemblyStats st;
    std::vector<RawSample> raw;
    int buses = -1;
    StateLayout layout;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const auto& trace = traces[i];
        if (buses < 0) {
            buses = trace.topology.bus_count();
            layout = StateLayout(trace.topology);
        } else if (trace.topology.bus_count() != buses) {
            throw DataError("assemble_dataset: traces mix networks with different bus counts");
        }
        const MeasurementModel model(trace.topology, trace.plan);
        for (const auto& rep : reports[i].steps) {
            if (rep.verdict != Verdict::SlcOrFdia) continue;
            ++st.flagged;
            const auto& label = trace.steps.at(rep.t).label;
            if (label.normal()) {
                ++st.false_alarms;
                continue;
            }
            // Exactly one SLC or FDIA spec must explain the step.
            const AnomalySpec* spec = nullptr;
            int count = 0;
            for (int k : label.active)
                if (trace.specs[k].kind != AnomalyKind::BadData) {
                    spec = &trace.specs[k];
                    ++count;
                }
            if (count != 1) {
                ++st.off_task;
                continue;
            }
            const int kind = spec->kind == AnomalyKind::SuddenLoadChange ? 0 : 1;
            if ((task == Task::IdentifySlc && kind != 0) || (task == Task::IdentifyFdia && kind != 1)) {
                ++st.off_task;
                continue;
            }
            RawSample s;
            s.features = extract_bus_features(rep, trace.steps[rep.t].z, model);
            s.kind = kind;
            s.targets = spec->targets;
            s.topology = trace.topology_id;
            s.trace = static_cast<int>(i);
            s.step = rep.t;
            raw.push_back(std::move(s));
        }
    }
    st.used = static_cast<int>(raw.size());
    if (stats) *stats = st;
    if (raw.empty())
        throw DataError("no ADI-flagged step matches task '" + to_string(task) + "'");

    Dataset ds;
    ds.task = task;
    ds.feature_names = feature_names(layout);
    const int n = static_cast<int>(raw.size());
    ds.features.resize(n, static_cast<Eigen::Index>(ds.feature_names.size()));
    for (int r = 0; r < n; ++r) ds.features.row(r) = raw[r].features.transpose();
    for (const auto& s : raw) {
        ds.topology.push_back(s.topology);
        ds.trace.push_back(s.trace);
        ds.step.push_back(s.step);
    }
    ds.split.assign(n, Split::Unassigned);

    if (task == Task::Classify) {
        ds.class_names = {"SLC", "FDIA"};
        for (const auto& s : raw) ds.labels.push_back(s.kind);
        return ds;
    }

    const int targets = task == Task::IdentifySlc ? buses : layout.dim();
    for (int j = 0; j < targets; ++j)
        ds.target_names.push_back(task == Task::IdentifySlc ? "bus" + std::to_string(j + 1)
                                                            : layout.name(j));
    ds.origins = Eigen::MatrixXi::Zero(n, targets);
    std::map<int, int> present;  // target -> class index, in target order
    for (int r = 0; r < n; ++r) {
        for (int t : raw[r].targets) ds.origins(r, t) = 1;
        if (raw[r].targets.size() == 1) present.emplace(raw[r].targets[0], 0);
    }
    int next = 0;
    for (auto& [target, cls] : present) {
        cls = next++;
        ds.class_names.push_back(ds.target_names[target]);
    }
    for (int r = 0; r < n; ++r)
        ds.labels.push_back(raw[r].targets.size() == 1 ? present.at(raw[r].targets[0]) : -1);
    return ds;
}

namespace {

std::vector<int> strata(const Dataset& ds) {
    if (!ds.multi_label()) return ds.labels;
    std::vector<int> key(ds.size(), -1);
    for (int r = 0; r < ds.size(); ++r)
        for (int j = 0; j < ds.origins.cols(); ++j)
            if (ds.origins(r, j)) {
                key[r] = j;
                break;
            }
    return key;
}

}  // namespace

Dataset balance_classes(const Dataset& dataset, std::uint64_t seed) {
    if (dataset.multi_label()) throw UsageError("class balancing needs single-label data");
    std::vector<std::vector<int>> members(dataset.class_names.size());
    for (int i = 0; i < dataset.size(); ++i) members.at(dataset.labels[i]).push_back(i);
    std::size_t keep = std::numeric_limits<std::size_t>::max();
    for (const auto& m : members)
        if (!m.empty()) keep = std::min(keep, m.size());
    Rng gen(seed);
    std::vector<int> rows;
    for (auto& m : members) {
        std::shuffle(m.begin(), m.end(), gen);
        rows.insert(rows.end(), m.begin(), m.begin() + static_cast<long>(std::min(keep, m.size())));
    }
    std::sort(rows.begin(), rows.end());
    Dataset out = dataset.subset(rows);
    out.seed = seed;
    return out;
}

Dataset drop_rare_classes(const Dataset& dataset, int min_count, std::vector<std::string>* dropped) {
    if (dataset.multi_label()) throw UsageError("dropping rare classes needs single-label data");
    const auto counts = dataset.class_counts();
    std::vector<int> remap(counts.size(), -1);
    std::vector<std::string> names;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] >= min_count) {
            remap[c] = static_cast<int>(names.size());
            names.push_back(dataset.class_names[c]);
        } else if (dropped && counts[c] > 0) {
            dropped->push_back(dataset.class_names[c]);
        }
    }
    std::vector<int> rows;
    for (int r = 0; r < dataset.size(); ++r)
        if (remap.at(dataset.labels[r]) >= 0) rows.push_back(r);
    if (rows.empty()) throw DataError("every class has fewer than " + std::to_string(min_count) + " samples");
    Dataset out = dataset.subset(rows);
    for (int& y : out.labels) y = remap[y];
    out.class_names = std::move(names);
    return out;
}

void stratified_split(Dataset& dataset, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw UsageError("split fraction must lie in (0, 1)");
    const auto key = strata(dataset);
    std::map<int, std::vector<int>> groups;
    for (int r = 0; r < dataset.size(); ++r) groups[key[r]].push_back(r);
    Rng rng(seed);
    dataset.split.assign(dataset.size(), Split::Test);
    for (auto& [cls, members] : groups) {
        if (members.size() < 2) {
            const std::string name =
                dataset.multi_label() ? dataset.target_names.at(cls) : dataset.class_names.at(cls);
            throw DataError("stratified split: class '" + name + "' has a single sample");
        }
        std::shuffle(members.begin(), members.end(), rng);
        const auto train = static_cast<std::size_t>(std::lround(fraction * members.size()));
        for (std::size_t i = 0; i < train; ++i) dataset.split[members[i]] = Split::Train;
    }
    dataset.seed = seed;
    char buf[64];
    std::snprintf(buf, sizeof buf, "stratified:%g", fraction);
    dataset.split_mode = buf;
}

void topology_holdout_split(Dataset& dataset, const std::vector<int>& train_topologies) {
    if (train_topologies.empty()) throw UsageError("topology holdout needs at least one training topology");
    dataset.split.assign(dataset.size(), Split::Test);
    int train = 0;
    for (int r = 0; r < dataset.size(); ++r)
        if (std::find(train_topologies.begin(), train_topologies.end(), dataset.topology[r]) !=
            train_topologies.end()) {
            dataset.split[r] = Split::Train;
            ++train;
        }
    if (train == 0 || train == dataset.size())
        throw DataError("topology holdout leaves an empty train or test split");
    std::string mode = "topology-holdout:";
    for (std::size_t i = 0; i < train_topologies.size(); ++i)
        mode += (i ? "," : "") + std::to_string(train_topologies[i]);
    dataset.split_mode = mode;
}

namespace {

const char* split_name(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Test: return "test";
        case Split::Unassigned: break;
    }
    return "none";
}

}  // namespace

void write_dataset(const Dataset& ds, const std::string& csv_path, const nlohmann::json& config) {
    nlohmann::json schema;
    schema["format"] = "gridad-dataset/1";
    schema["task"] = to_string(ds.task);
    schema["features"] = ds.feature_names;
    schema["classes"] = ds.class_names;
    schema["targets"] = ds.target_names;
    schema["seed"] = ds.seed;
    schema["split_mode"] = ds.split_mode;
    schema["counts"] = ds.class_counts();
    schema["samples"] = ds.size();
    schema["config"] = config;
    schema["config_hash"] = hash_hex(config_hash(config));

    CsvWriter csv(csv_path);
    csv.comment(provenance_line(config, ds.seed));
    std::vector<std::string> header;
    for (int j = 0; j < ds.feature_count(); ++j) header.push_back("f_" + std::to_string(j));
    header.push_back("class");
    for (const auto& t : ds.target_names) header.push_back("o_" + t);
    for (const char* c : {"topology", "trace", "t", "split"}) header.push_back(c);
    csv.row(header);
    std::vector<std::string> row;
    for (int r = 0; r < ds.size(); ++r) {
        row.clear();
        for (int j = 0; j < ds.feature_count(); ++j) row.push_back(format_number(ds.features(r, j)));
        row.push_back(ds.labels[r] < 0 ? "multi" : ds.class_names[ds.labels[r]]);
        for (int j = 0; j < static_cast<int>(ds.target_names.size()); ++j)
            row.push_back(std::to_string(ds.origins(r, j)));
        row.push_back(std::to_string(ds.topology[r]));
        row.push_back(std::to_string(ds.trace[r]));
        row.push_back(std::to_string(ds.step[r]));
        row.push_back(split_name(ds.split[r]));
        csv.row(row);
    }
    write_text_file(sidecar_path(csv_path), schema.dump(2) + "\n");
    csv.close();
}

Dataset read_dataset(const std::string& csv_path) {
    const std::string schema_path = sidecar_path(csv_path);
    const auto schema = read_json_file(schema_path);
    Dataset ds;
    try {
        ds.task = task_from_string(schema.at("task").get<std::string>());
        ds.feature_names = schema.at("features").get<std::vector<std::string>>();
        ds.class_names = schema.at("classes").get<std::vector<std::string>>();
        ds.target_names = schema.at("targets").get<std::vector<std::string>>();
        ds.seed = schema.value("seed", std::uint64_t{0});
        ds.split_mode = schema.value("split_mode", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw DataError(schema_path + ": " + e.what());
    }
    const auto table = read_csv(csv_path);
    const int nf = static_cast<int>(ds.feature_names.size());
    const int nt = static_cast<int>(ds.target_names.size());
    if (static_cast<int>(table.header.size()) != nf + 1 + nt + 4)
        throw DataError(csv_path + ": column count does not match the schema sidecar");
    const int n = static_cast<int>(table.rows.size());
    ds.features.resize(n, nf);
    ds.origins = Eigen::MatrixXi::Zero(n, nt);
    for (int r = 0; r < n; ++r) {
        const auto& cells = table.rows[r];
        const int line = table.line_numbers[r];
        for (int j = 0; j < nf; ++j) ds.features(r, j) = parse_number(cells[j], csv_path, line);
        const auto& cls = cells[nf];
        if (cls == "multi") {
            ds.labels.push_back(-1);
        } else {
            const auto it = std::find(ds.class_names.begin(), ds.class_names.end(), cls);
            if (it == ds.class_names.end())
                throw DataError(csv_path + ":" + std::to_string(line) + ": unknown class '" + cls + "'");
            ds.labels.push_back(static_cast<int>(it - ds.class_names.begin()));
        }
        for (int j = 0; j < nt; ++j)
            ds.origins(r, j) = static_cast<int>(parse_number(cells[nf + 1 + j], csv_path, line));
        ds.topology.push_back(static_cast<int>(parse_number(cells[nf + 1 + nt], csv_path, line)));
        ds.trace.push_back(static_cast<int>(parse_number(cells[nf + 2 + nt], csv_path, line)));
        ds.step.push_back(static_cast<int>(parse_number(cells[nf + 3 + nt], csv_path, line)));
        const auto& sp = cells[nf + 4 + nt];
        if (sp == "train") ds.split.push_back(Split::Train);
        else if (sp == "test") ds.split.push_back(Split::Test);
        else if (sp == "none") ds.split.push_back(Split::Unassigned);
        else throw DataError(csv_path + ":" + std::to_string(line) + ": bad split tag '" + sp + "'");
    }
    if (n == 0) throw DataError(csv_path + ": dataset has no samples");
    return ds;
}

}  // namespace gridad
