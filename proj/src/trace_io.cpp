#include "gridad/trace_io.hpp"

#include <cstdio>
#include <fstream>

#include "gridad/csv.hpp"
#include "gridad/error.hpp"

namespace gridad {

std::uint64_t config_hash(const nlohmann::json& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string provenance_line(const nlohmann::json& config, std::uint64_t seed) {
    return "config=" + hash_hex(config_hash(config)) + " seed=" + std::to_string(seed);
}

std::string sidecar_path(const std::string& csv_path) {
    const auto dot = csv_path.rfind('.');
    const auto slash = csv_path.find_last_of('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return csv_path + ".json";
    return csv_path.substr(0, dot) + ".json";
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_trace(const ScenarioTrace& trace, const std::string& csv_path,
                 const nlohmann::json& config) {
    const int m = trace.plan.size();
    const StateLayout layout(trace.topology);
    const int n = layout.dim();

    nlohmann::json side;
    side["format"] = "gridad-trace/1";
    side["config"] = config;
    side["config_hash"] = hash_hex(config_hash(config));
    side["seed"] = trace.seed;
    side["topology_id"] = trace.topology_id;
    side["topology"] = topology_to_json(trace.topology);
    side["plan"] = plan_to_json(trace.plan, trace.topology);
    side["sigma"] = trace.plan.items.empty() ? 0.01 : trace.plan.items.front().sigma;
    side["specs"] = nlohmann::json::array();
    for (const auto& s : trace.specs)
        side["specs"].push_back(spec_to_json(s, trace.topology, trace.plan));
    side["steps"] = trace.steps.size();

    CsvWriter csv(csv_path);
    csv.comment(provenance_line(config, trace.seed));
    std::vector<std::string> header{"t", "label", "label_targets"};
    for (int i = 0; i < m; ++i) header.push_back("z_" + std::to_string(i + 1));
    for (int i = 0; i < m; ++i) header.push_back("z_clean_" + std::to_string(i + 1));
    for (int i = 0; i < n; ++i) header.push_back("x_true_" + std::to_string(i + 1));
    csv.row(header);
    std::vector<std::string> row;
    for (const auto& step : trace.steps) {
        row.clear();
        row.push_back(std::to_string(step.t));
        row.push_back(trace.label_text(step.label));
        row.push_back(trace.label_targets(step.label));
        for (int i = 0; i < m; ++i) row.push_back(format_number(step.z[i]));
        for (int i = 0; i < m; ++i) row.push_back(format_number(step.z_clean[i]));
        for (int i = 0; i < n; ++i) row.push_back(format_number(step.x_true[i]));
        csv.row(row);
    }
    write_text_file(sidecar_path(csv_path), side.dump(2) + "\n");
    csv.close();
}

ScenarioTrace read_trace(const std::string& csv_path) {
    const std::string side_path = sidecar_path(csv_path);
    const auto side = read_json_file(side_path);
    ScenarioTrace trace;
    try {
        trace.topology = topology_from_json(side.at("topology"));
        trace.topology_id = side.value("topology_id", -1);
        trace.seed = side.at("seed").get<std::uint64_t>();
        trace.plan = default_plan(trace.topology, side.value("sigma", 0.01));
        for (const auto& s : side.at("specs"))
            trace.specs.push_back(spec_from_json(s, trace.topology, trace.plan));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(side_path + ": " + e.what());
    } catch (const UsageError& e) {
        throw DataError(side_path + ": " + e.what());
    }
    if (side.contains("plan") && side["plan"].is_array() &&
        static_cast<int>(side["plan"].size()) != trace.plan.size())
        throw DataError(side_path + ": plan does not match the default metering of its topology");

    const auto table = read_csv(csv_path);
    const int m = trace.plan.size();
    const int n = StateLayout(trace.topology).dim();
    if (static_cast<int>(table.header.size()) != 3 + 2 * m + n)
        throw DataError(csv_path + ": expected " + std::to_string(3 + 2 * m + n) +
                        " columns for this topology, found " +
                        std::to_string(table.header.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cells = table.rows[r];
        const int line = table.line_numbers[r];
        TraceStep step;
        step.t = static_cast<int>(parse_number(cells[0], csv_path, line));
        if (step.t != static_cast<int>(r))
            throw DataError(csv_path + ":" + std::to_string(line) + ": steps must be consecutive from 0");
        step.z.resize(m);
        step.z_clean.resize(m);
        step.x_true.resize(n);
        for (int i = 0; i < m; ++i) step.z[i] = parse_number(cells[3 + i], csv_path, line);
        for (int i = 0; i < m; ++i) step.z_clean[i] = parse_number(cells[3 + m + i], csv_path, line);
        for (int i = 0; i < n; ++i) step.x_true[i] = parse_number(cells[3 + 2 * m + i], csv_path, line);
        for (int k = 0; k < static_cast<int>(trace.specs.size()); ++k)
            if (trace.specs[k].active(step.t)) step.label.active.push_back(k);
        if (trace.label_text(step.label) != cells[1])
            throw DataError(csv_path + ":" + std::to_string(line) + ": label '" + cells[1] +
                            "' disagrees with the sidecar anomaly schedule");
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

}  // namespace gridad
