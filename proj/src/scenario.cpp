#include "gridad/scenario.hpp"

#include <algorithm>
#include <set>

#include "gridad/error.hpp"
#include "gridad/wls.hpp"

namespace gridad {

LoadProfile LoadProfile::ramp(int steps, int buses, double start, double end) {
    if (steps < 1) throw UsageError("profile needs at least one step");
    if (!(start > 0.0 && end > 0.0)) throw UsageError("load multipliers must be positive");
    LoadProfile p;
    p.tag = "ramp";
    p.multipliers.resize(steps, buses);
    for (int t = 0; t < steps; ++t) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(t) / (steps - 1);
        p.multipliers.row(t).setConstant(start + (end - start) * frac);
    }
    return p;
}

std::string to_string(AnomalyKind kind) {
    switch (kind) {
        case AnomalyKind::BadData: return "BD";
        case AnomalyKind::SuddenLoadChange: return "SLC";
        case AnomalyKind::FalseDataInjection: return "FDIA";
    }
    return "?";
}

AnomalyKind anomaly_kind_from_string(const std::string& text) {
    if (text == "BD" || text == "BadData" || text == "bad-data") return AnomalyKind::BadData;
    if (text == "SLC" || text == "SuddenLoadChange") return AnomalyKind::SuddenLoadChange;
    if (text == "FDIA" || text == "FalseDataInjection") return AnomalyKind::FalseDataInjection;
    throw UsageError("unknown anomaly kind '" + text + "'");
}

std::string ScenarioTrace::label_text(const StepLabel& label) const {
    if (label.normal()) return "normal";
    std::string out;
    for (int k : label.active) {
        if (!out.empty()) out += '+';
        out += to_string(specs.at(k).kind);
    }
    return out;
}

std::string ScenarioTrace::label_targets(const StepLabel& label) const {
    const StateLayout layout(topology);
    std::string out;
    for (int k : label.active) {
        const auto& spec = specs.at(k);
        for (int target : spec.targets) {
            if (!out.empty()) out += ';';
            switch (spec.kind) {
                case AnomalyKind::BadData: out += plan.label(target, topology); break;
                case AnomalyKind::SuddenLoadChange: out += std::to_string(target + 1); break;
                case AnomalyKind::FalseDataInjection: out += layout.name(target); break;
            }
        }
    }
    return out;
}

void validate_specs(const std::vector<AnomalySpec>& specs, const NetworkTopology& topology,
                    const MeasurementPlan& plan, int steps, bool allow_concurrent) {
    const StateLayout layout(topology);
    for (std::size_t k = 0; k < specs.size(); ++k) {
        const auto& s = specs[k];
        const std::string where = "anomalies[" + std::to_string(k) + "]";
        if (s.targets.empty()) throw UsageError(where + ": target list is empty");
        if (s.magnitudes.size() != 1 && s.magnitudes.size() != s.targets.size())
            throw UsageError(where + ": need one magnitude or one per target");
        if (s.onset < 0 || s.onset >= steps) throw UsageError(where + ": onset outside the trace");
        if (s.clear && *s.clear <= s.onset) throw UsageError(where + ": clear must follow onset");
        std::set<int> unique(s.targets.begin(), s.targets.end());
        if (unique.size() != s.targets.size()) throw UsageError(where + ": duplicate targets");
        switch (s.kind) {
            case AnomalyKind::BadData:
                for (int t : s.targets)
                    if (t < 0 || t >= plan.size()) throw UsageError(where + ": measurement out of range");
                break;
            case AnomalyKind::SuddenLoadChange:
                for (std::size_t i = 0; i < s.targets.size(); ++i) {
                    const int b = s.targets[i];
                    if (b < 0 || b >= topology.bus_count()) throw UsageError(where + ": bus out of range");
                    const double f = s.magnitude(i);
                    if (!(f > 0.0 && f <= 1.0))
                        throw UsageError(where + ": shed fraction must lie in (0, 1]");
                    const auto& bus = topology.buses()[b];
                    if (bus.p_load == 0.0 && bus.q_load == 0.0)
                        throw UsageError(where + ": bus " + std::to_string(b + 1) + " carries no load");
                }
                break;
            case AnomalyKind::FalseDataInjection: {
                std::set<int> buses;
                for (std::size_t i = 0; i < s.targets.size(); ++i) {
                    const int c = s.targets[i];
                    if (c < 0 || c >= layout.dim()) throw UsageError(where + ": state out of range");
                    if (s.magnitude(i) == 0.0) throw UsageError(where + ": zero state offset");
                    buses.insert(layout.bus_of(c));
                }
                if (static_cast<int>(buses.size()) > kMaxAttackedBuses)
                    throw UsageError(where + ": attack spans more than " +
                                     std::to_string(kMaxAttackedBuses) + " buses");
                break;
            }
        }
    }
    if (allow_concurrent) return;
    for (std::size_t a = 0; a < specs.size(); ++a)
        for (std::size_t b = a + 1; b < specs.size(); ++b) {
            const int end_a = specs[a].clear.value_or(steps);
            const int end_b = specs[b].clear.value_or(steps);
            if (specs[a].onset < end_b && specs[b].onset < end_a)
                throw UsageError("anomalies[" + std::to_string(a) + "] and anomalies[" +
                                 std::to_string(b) + "] overlap in time; set allow_concurrent");
        }
}

Eigen::VectorXd add_measurement_noise(const Eigen::VectorXd& clean, const MeasurementPlan& plan,
                                      Rng& rng) {
    if (clean.size() != plan.size()) throw DataError("noise: vector and plan sizes differ");
    std::normal_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd out = clean;
    for (int i = 0; i < plan.size(); ++i) out(i) += plan.items[i].sigma * unit(rng);
    return out;
}

Eigen::VectorXd add_measurement_noise(const Eigen::VectorXd& clean, const MeasurementPlan& plan,
                                      std::uint64_t seed) {
    Rng rng(seed);
    return add_measurement_noise(clean, plan, rng);
}

Eigen::VectorXd inject_bad_data(const Eigen::VectorXd& observed, const Eigen::VectorXd& clean,
                                const AnomalySpec& spec) {
    if (spec.kind != AnomalyKind::BadData) throw UsageError("inject_bad_data needs a BD spec");
    Eigen::VectorXd out = observed;
    for (std::size_t k = 0; k < spec.targets.size(); ++k) {
        const int i = spec.targets[k];
        if (i < 0 || i >= observed.size()) throw DataError("bad-data target out of range");
        const double f = spec.magnitude(k);
        out(i) = spec.full_scale ? clean(i) + f * kFullScale : clean(i) * (1.0 + f);
    }
    return out;
}

OperatingPoint apply_sudden_load_change(const OperatingPoint& loads, const AnomalySpec& spec) {
    if (spec.kind != AnomalyKind::SuddenLoadChange)
        throw UsageError("apply_sudden_load_change needs an SLC spec");
    OperatingPoint out = loads;
    for (std::size_t k = 0; k < spec.targets.size(); ++k) {
        const int b = spec.targets[k];
        if (b < 0 || b >= loads.p_load.size()) throw DataError("SLC bus out of range");
        if (loads.p_load(b) == 0.0 && loads.q_load(b) == 0.0)
            throw UsageError("SLC at bus " + std::to_string(b + 1) + ", which carries no load");
        const double keep = 1.0 - spec.magnitude(k);
        out.p_load(b) *= keep;
        out.q_load(b) *= keep;
    }
    return out;
}

StealthAttack build_stealth_attack(const Eigen::VectorXd& estimate, const Eigen::VectorXd& offset,
                                   const MeasurementModel& model) {
    const auto& layout = model.layout();
    if (offset.size() != layout.dim() || estimate.size() != layout.dim())
        throw DataError("attack offset and estimate must match the state dimension");
    std::set<int> buses;
    for (int c = 0; c < layout.dim(); ++c)
        if (offset(c) != 0.0) buses.insert(layout.bus_of(c));
    if (static_cast<int>(buses.size()) > kMaxAttackedBuses)
        throw UsageError("attack offset spans more than " + std::to_string(kMaxAttackedBuses) +
                         " buses");
    StealthAttack out;
    out.attacked_state = estimate + offset;
    if (buses.empty()) {
        out.attack = Eigen::VectorXd::Zero(model.measurements());
        return out;
    }
    out.attack = model.evaluate(out.attacked_state) - model.evaluate(estimate);
    return out;
}

Eigen::VectorXd apply_attack(const Eigen::VectorXd& observed, const Eigen::VectorXd& attack) {
    if (observed.size() != attack.size()) throw DataError("attack and measurement sizes differ");
    return observed + attack;
}

ScenarioTrace generate_trajectory(const NetworkTopology& topology, const LoadProfile& profile,
                                  const std::vector<AnomalySpec>& specs, std::uint64_t seed,
                                  const SimulationOptions& options) {
    if (profile.multipliers.cols() != topology.bus_count())
        throw UsageError("load profile width does not match the bus count");
    if ((profile.multipliers.array() <= 0.0).any())
        throw UsageError("load multipliers must be positive");
    ScenarioTrace trace;
    trace.topology_id = options.topology_id;
    trace.topology = topology;
    trace.plan = default_plan(topology, options.sigma);
    trace.specs = specs;
    trace.seed = seed;
    validate_specs(specs, topology, trace.plan, profile.steps(), options.allow_concurrent);

    const MeasurementModel model(topology, trace.plan);
    const auto& layout = model.layout();
    const OperatingPoint nominal = OperatingPoint::nominal(topology);
    Rng rng(seed);
    std::optional<StateVector> warm;

    for (int t = 0; t < profile.steps(); ++t) {
        try {
            OperatingPoint op = nominal;
            op.p_load = op.p_load.cwiseProduct(profile.multipliers.row(t).transpose());
            op.q_load = op.q_load.cwiseProduct(profile.multipliers.row(t).transpose());
            TraceStep step;
            step.t = t;
            for (int k = 0; k < static_cast<int>(specs.size()); ++k)
                if (specs[k].active(t)) step.label.active.push_back(k);
            for (int k : step.label.active)
                if (specs[k].kind == AnomalyKind::SuddenLoadChange)
                    op = apply_sudden_load_change(op, specs[k]);

            const auto pf = solve_power_flow(topology, op, warm);
            warm = pf.state;
            step.x_true = pf.state.pack(layout);
            step.z_clean = model.evaluate(step.x_true);
            step.z = add_measurement_noise(step.z_clean, trace.plan, rng);
            for (int k : step.label.active)
                if (specs[k].kind == AnomalyKind::BadData)
                    step.z = inject_bad_data(step.z, step.z_clean, specs[k]);
            for (int k : step.label.active) {
                if (specs[k].kind != AnomalyKind::FalseDataInjection) continue;
                Eigen::VectorXd offset = Eigen::VectorXd::Zero(layout.dim());
                for (std::size_t i = 0; i < specs[k].targets.size(); ++i)
                    offset(specs[k].targets[i]) = specs[k].magnitude(i);
                const auto operator_view = estimate_wls(step.z, model);
                step.z = apply_attack(step.z, build_stealth_attack(operator_view.estimate, offset, model).attack);
            }
            trace.steps.push_back(std::move(step));
        } catch (const DivergenceError& e) {
            throw DivergenceError("step " + std::to_string(t) + ": " + e.what(), e.last_mismatch(),
                                  e.last_iterate());
        } catch (const NumericalError& e) {
            throw NumericalError("step " + std::to_string(t) + ": " + e.what());
        }
    }
    return trace;
}

nlohmann::json spec_to_json(const AnomalySpec& spec, const NetworkTopology& topology,
                            const MeasurementPlan& plan) {
    const StateLayout layout(topology);
    nlohmann::json doc{{"kind", to_string(spec.kind)}, {"onset", spec.onset}};
    if (spec.clear) doc["clear"] = *spec.clear;
    auto& targets = doc["targets"] = nlohmann::json::array();
    for (int t : spec.targets) {
        switch (spec.kind) {
            case AnomalyKind::BadData: targets.push_back(plan.label(t, topology)); break;
            case AnomalyKind::SuddenLoadChange: targets.push_back(t + 1); break;
            case AnomalyKind::FalseDataInjection: targets.push_back(layout.name(t)); break;
        }
    }
    doc["magnitudes"] = spec.magnitudes;
    if (spec.full_scale) doc["full_scale"] = true;
    return doc;
}

AnomalySpec spec_from_json(const nlohmann::json& doc, const NetworkTopology& topology,
                           const MeasurementPlan& plan) {
    const StateLayout layout(topology);
    AnomalySpec spec;
    try {
        spec.kind = anomaly_kind_from_string(doc.at("kind").get<std::string>());
        spec.onset = doc.at("onset").get<int>();
        if (doc.contains("clear") && !doc["clear"].is_null()) spec.clear = doc["clear"].get<int>();
        for (const auto& target : doc.at("targets")) {
            switch (spec.kind) {
                case AnomalyKind::SuddenLoadChange:
                    spec.targets.push_back(topology.index_of(target.get<int>()));
                    break;
                case AnomalyKind::FalseDataInjection:
                    spec.targets.push_back(target.is_number_integer() ? target.get<int>()
                                                                      : layout.parse(target.get<std::string>()));
                    break;
                case AnomalyKind::BadData: {
                    if (target.is_number_integer()) {
                        spec.targets.push_back(target.get<int>());
                        break;
                    }
                    const auto name = target.get<std::string>();
                    int row = -1;
                    for (int i = 0; i < plan.size() && row < 0; ++i)
                        if (plan.label(i, topology) == name) row = i;
                    if (row < 0) throw UsageError("unknown measurement '" + name + "'");
                    spec.targets.push_back(row);
                    break;
                }
            }
        }
        const auto& mags = doc.at("magnitudes");
        if (mags.is_number())
            spec.magnitudes = {mags.get<double>()};
        else
            spec.magnitudes = mags.get<std::vector<double>>();
        spec.full_scale = doc.value("full_scale", false);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("anomaly spec: ") + e.what());
    } catch (const DataError& e) {
        throw UsageError(std::string("anomaly spec: ") + e.what());
    }
    return spec;
}

nlohmann::json ScenarioConfig::to_json() const {
    nlohmann::json doc{{"topology", topology},
                       {"profile", {{"kind", "ramp"}, {"start", profile_start}, {"end", profile_end},
                                    {"steps", steps}}},
                       {"anomalies", anomalies},
                       {"seed", seed},
                       {"sigma", sigma},
                       {"allow_concurrent", allow_concurrent}};
    if (!name.empty()) doc["name"] = name;
    return doc;
}

ScenarioConfig ScenarioConfig::from_json(const nlohmann::json& doc) {
    ScenarioConfig c;
    try {
        c.topology = doc.value("topology", nlohmann::json(0));
        if (doc.contains("profile")) {
            const auto& p = doc["profile"];
            const auto kind = p.value("kind", std::string("ramp"));
            if (kind != "ramp") throw UsageError("profile.kind: only 'ramp' is supported");
            c.profile_start = p.value("start", 1.0);
            c.profile_end = p.value("end", 0.95);
            c.steps = p.value("steps", 100);
        }
        c.anomalies = doc.value("anomalies", nlohmann::json::array());
        if (!doc.contains("seed")) throw UsageError("seed: required");
        c.seed = doc.at("seed").get<std::uint64_t>();
        c.sigma = doc.value("sigma", 0.01);
        c.allow_concurrent = doc.value("allow_concurrent", false);
        c.name = doc.value("name", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("scenario config: ") + e.what());
    }
    return c;
}

ScenarioTrace run_scenario(const ScenarioConfig& config) {
    int id = 0;
    const NetworkTopology topology = resolve_topology(config.topology, &id);
    const MeasurementPlan plan = default_plan(topology, config.sigma);
    std::vector<AnomalySpec> specs;
    for (const auto& a : config.anomalies) specs.push_back(spec_from_json(a, topology, plan));
    SimulationOptions options;
    options.sigma = config.sigma;
    options.allow_concurrent = config.allow_concurrent;
    options.topology_id = id;
    return generate_trajectory(topology,
                               LoadProfile::ramp(config.steps, topology.bus_count(),
                                                 config.profile_start, config.profile_end),
                               specs, config.seed, options);
}

}  // namespace gridad
