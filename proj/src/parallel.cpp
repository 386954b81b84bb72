#include "gridad/batch.hpp"
#include "gridad/parallel.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include <omp.h>

#include "gridad/error.hpp"

namespace gridad {

int max_threads() { return omp_get_max_threads(); }

void set_max_threads(int n) {
    if (n >= 1) omp_set_num_threads(n);
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::vector<int> load_buses(const NetworkTopology& topology) {
    std::vector<int> out;
    for (int b = 0; b < topology.bus_count(); ++b) {
        const auto& bus = topology.buses()[b];
        if (bus.p_load != 0.0 || bus.q_load != 0.0) out.push_back(bus.id);
    }
    return out;
}

std::vector<int> bus_list(const nlohmann::json& field, const NetworkTopology& topology) {
    if (field.is_string()) {
        if (field.get<std::string>() != "load") throw UsageError("grid: buses must be a list or \"load\"");
        return load_buses(topology);
    }
    return field.get<std::vector<int>>();
}

std::vector<std::string> state_list(const nlohmann::json& field, const StateLayout& layout) {
    std::vector<std::string> out;
    if (field.is_string()) {
        const auto which = field.get<std::string>();
        for (int c = 0; c < layout.dim(); ++c) {
            const bool angle = layout.is_angle(c);
            if (which == "all" || (which == "angles" && angle) || (which == "magnitudes" && !angle))
                out.push_back(layout.name(c));
        }
        if (out.empty()) throw UsageError("grid: states must be a list or one of all/angles/magnitudes");
        return out;
    }
    for (const auto& s : field) out.push_back(s.is_string() ? s.get<std::string>() : layout.name(s.get<int>()));
    return out;
}

nlohmann::json anomaly(const char* kind, int onset, const nlohmann::json& block,
                       nlohmann::json targets, nlohmann::json magnitudes) {
    nlohmann::json a{{"kind", kind}, {"onset", onset}, {"targets", std::move(targets)},
                     {"magnitudes", std::move(magnitudes)}};
    if (block.contains("clear")) a["clear"] = block["clear"];
    return a;
}

}  // namespace

std::vector<ScenarioConfig> expand_grid(const nlohmann::json& grid, std::uint64_t master_seed) {
    std::vector<ScenarioConfig> out;
    try {
        const auto topologies = grid.value("topologies", std::vector<int>{0});
        const int repeats = grid.value("repeats", 1);
        const int steps = grid.value("steps", 100);
        const double sigma = grid.value("sigma", 0.01);
        double start = 1.0, end = 0.95;
        if (grid.contains("profile")) {
            start = grid["profile"].value("start", 1.0);
            end = grid["profile"].value("end", 0.95);
        }
        // Random combinations come from their own stream so adding a block
        // never reshuffles the others.
        Rng draw(derive_seed(master_seed, 0xC0FFEEULL));

        auto push = [&](int topo, std::string name, nlohmann::json anomalies) {
            ScenarioConfig c;
            c.topology = topo;
            c.topology_id = topo;
            c.steps = steps;
            c.sigma = sigma;
            c.profile_start = start;
            c.profile_end = end;
            c.anomalies = std::move(anomalies);
            c.seed = derive_seed(master_seed, out.size());
            c.name = std::move(name);
            out.push_back(std::move(c));
        };

        for (int topo : topologies) {
            const NetworkTopology topology = catalog_topology(topo);
            const StateLayout layout(topology);
            const std::string tp = "t" + std::to_string(topo);
            for (int r = 0; r < repeats; ++r) {
                const std::string rp = "-r" + std::to_string(r);
                if (grid.contains("normal")) {
                    const int count = grid["normal"].value("count", 1);
                    for (int i = 0; i < count; ++i)
                        push(topo, tp + "-normal" + std::to_string(i) + rp, nlohmann::json::array());
                }
                if (grid.contains("slc")) {
                    const auto& b = grid["slc"];
                    const int onset = b.value("onset", steps / 2);
                    for (int bus : bus_list(b.at("buses"), topology))
                        for (double f : b.at("fractions").get<std::vector<double>>())
                            push(topo, tp + "-slc-b" + std::to_string(bus) + "-f" + fmt(f) + rp,
                                 nlohmann::json::array({anomaly("SLC", onset, b, {bus}, {f})}));
                }
                if (grid.contains("fdia")) {
                    const auto& b = grid["fdia"];
                    const int onset = b.value("onset", steps / 2);
                    for (const auto& s : state_list(b.at("states"), layout))
                        for (double c : b.at("offsets").get<std::vector<double>>())
                            push(topo, tp + "-fdia-" + s + "-c" + fmt(c) + rp,
                                 nlohmann::json::array({anomaly("FDIA", onset, b, {s}, {c})}));
                }
                if (grid.contains("multi_slc")) {
                    const auto& b = grid["multi_slc"];
                    const int onset = b.value("onset", steps / 2);
                    const int count = b.value("count", 1);
                    const int max_buses = b.value("max_buses", kMaxAttackedBuses);
                    const auto range = b.value("fraction_range", std::vector<double>{0.3, 1.0});
                    auto pool = load_buses(topology);
                    for (int i = 0; i < count; ++i) {
                        const int nb = std::uniform_int_distribution<int>(
                            2, std::min<int>(max_buses, static_cast<int>(pool.size())))(draw);
                        std::shuffle(pool.begin(), pool.end(), draw);
                        std::vector<int> buses(pool.begin(), pool.begin() + nb);
                        std::sort(buses.begin(), buses.end());
                        std::vector<double> fr;
                        std::string name = tp + "-mslc";
                        for (int bus : buses) {
                            fr.push_back(std::uniform_real_distribution<double>(range.at(0), range.at(1))(draw));
                            name += "-b" + std::to_string(bus);
                        }
                        push(topo, name + "-" + std::to_string(i) + rp,
                             nlohmann::json::array({anomaly("SLC", onset, b, buses, fr)}));
                        std::sort(pool.begin(), pool.end());
                    }
                }
                if (grid.contains("multi_fdia")) {
                    const auto& b = grid["multi_fdia"];
                    const int onset = b.value("onset", steps / 2);
                    const int count = b.value("count", 1);
                    const int max_buses = b.value("max_buses", kMaxAttackedBuses);
                    const int max_states = b.value("max_states", 2 * kMaxAttackedBuses);
                    const auto range = b.value("offset_range", std::vector<double>{0.02, 0.1});
                    std::vector<int> pool(topology.bus_count());
                    for (int i = 0; i < count; ++i) {
                        for (int k = 0; k < topology.bus_count(); ++k) pool[k] = k;
                        const int nb = std::uniform_int_distribution<int>(1, max_buses)(draw);
                        std::shuffle(pool.begin(), pool.end(), draw);
                        std::vector<int> cols;
                        for (int k = 0; k < nb; ++k) {
                            cols.push_back(layout.magnitude_col(pool[k]));
                            if (auto a = layout.angle_col(pool[k])) cols.push_back(*a);
                        }
                        std::shuffle(cols.begin(), cols.end(), draw);
                        const int ns = std::uniform_int_distribution<int>(
                            2, std::max(2, std::min<int>(max_states, static_cast<int>(cols.size()))))(draw);
                        cols.resize(std::min<std::size_t>(cols.size(), static_cast<std::size_t>(ns)));
                        if (cols.size() < 2) {
                            // A lone slack bus has only its magnitude; borrow a second bus.
                            cols.push_back(layout.magnitude_col(pool[nb]));
                        }
                        std::sort(cols.begin(), cols.end());
                        nlohmann::json names = nlohmann::json::array();
                        std::vector<double> offs;
                        std::string name = tp + "-mfdia";
                        for (int c : cols) {
                            names.push_back(layout.name(c));
                            name += "-" + layout.name(c);
                            const double mag =
                                std::uniform_real_distribution<double>(range.at(0), range.at(1))(draw);
                            offs.push_back(std::bernoulli_distribution(0.5)(draw) ? mag : -mag);
                        }
                        push(topo, name + "-" + std::to_string(i) + rp,
                             nlohmann::json::array({anomaly("FDIA", onset, b, names, offs)}));
                    }
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("scenario grid: ") + e.what());
    }
    return out;
}

std::vector<ScenarioTrace> simulate_batch(const std::vector<ScenarioConfig>& configs, Execution exec) {
    std::vector<ScenarioTrace> traces(configs.size());
    for_each_index(static_cast<int>(configs.size()), exec, [&](int i) {
        try {
            traces[i] = run_scenario(configs[i]);
        } catch (const DivergenceError& e) {
            throw DivergenceError("scenario '" + configs[i].name + "': " + e.what(), e.last_mismatch(),
                                  e.last_iterate());
        } catch (const NumericalError& e) {
            throw NumericalError("scenario '" + configs[i].name + "': " + e.what());
        } catch (const UsageError& e) {
            throw UsageError("scenario '" + configs[i].name + "': " + e.what());
        }
    });
    return traces;
}

std::vector<DetectionReport> detect_batch(const std::vector<ScenarioTrace>& traces,
                                          const DetectionConfig& config, Execution exec) {
    std::vector<DetectionReport> reports(traces.size());
    for_each_index(static_cast<int>(traces.size()), exec,
                   [&](int i) { reports[i] = run_detection_pipeline(traces[i], config); });
    return reports;
}

}  // namespace gridad
