#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridad/measurement.hpp"
#include "gridad/network.hpp"
#include "gridad/power_flow.hpp"
#include "gridad/rng.hpp"

namespace gridad {

/// Per-step, per-bus load multipliers (T x N).
struct LoadProfile {
    Eigen::MatrixXd multipliers;
    std::string tag;

    int steps() const { return static_cast<int>(multipliers.rows()); }
    /// All loads move linearly from `start` to `end` over `steps` samples.
    static LoadProfile ramp(int steps, int buses, double start = 1.0, double end = 0.95);
};

enum class AnomalyKind { BadData, SuddenLoadChange, FalseDataInjection };

std::string to_string(AnomalyKind kind);  // "BD", "SLC", "FDIA"
AnomalyKind anomaly_kind_from_string(const std::string& text);

/// One anomaly active on [onset, clear). Targets are 0-based measurement rows
/// (BD), 0-based bus indices (SLC) or packed state columns (FDIA); magnitudes
/// are gross-error fractions, shed fractions or state offsets respectively.
struct AnomalySpec {
    AnomalyKind kind = AnomalyKind::BadData;
    int onset = 0;
    std::optional<int> clear;
    std::vector<int> targets;
    std::vector<double> magnitudes;
    /// BD only: add `fraction * kFullScale` instead of scaling the clean value.
    bool full_scale = false;

    bool active(int t) const { return t >= onset && (!clear || t < *clear); }
    double magnitude(std::size_t k) const {
        return magnitudes.size() == 1 ? magnitudes[0] : magnitudes.at(k);
    }
};

/// Full scale of a power or voltage meter for additive gross errors (p.u.).
inline constexpr double kFullScale = 1.0;
/// Adversary reach: states of at most this many buses.
inline constexpr int kMaxAttackedBuses = 4;

struct StepLabel {
    std::vector<int> active;  // indices into the trace's spec list
    bool normal() const { return active.empty(); }
};

struct TraceStep {
    int t = 0;
    Eigen::VectorXd x_true;
    Eigen::VectorXd z_clean;
    Eigen::VectorXd z;
    StepLabel label;
};

struct ScenarioTrace {
    int topology_id = 0;
    NetworkTopology topology;
    MeasurementPlan plan;
    std::vector<AnomalySpec> specs;
    std::uint64_t seed = 0;
    std::vector<TraceStep> steps;

    /// "normal", "SLC", "BD+SLC", ...
    std::string label_text(const StepLabel& label) const;
    /// Target names of the active specs, ';'-separated ("14", "V14", "Pinj14").
    std::string label_targets(const StepLabel& label) const;
};

struct SimulationOptions {
    double sigma = 0.01;
    bool allow_concurrent = false;
    int topology_id = 0;
};

/// Checks every spec invariant against the topology/plan and, unless
/// `allow_concurrent`, rejects time-overlapping specs. Throws UsageError.
void validate_specs(const std::vector<AnomalySpec>& specs, const NetworkTopology& topology,
                    const MeasurementPlan& plan, int steps, bool allow_concurrent);

Eigen::VectorXd add_measurement_noise(const Eigen::VectorXd& clean, const MeasurementPlan& plan,
                                      Rng& rng);
Eigen::VectorXd add_measurement_noise(const Eigen::VectorXd& clean, const MeasurementPlan& plan,
                                      std::uint64_t seed);

/// Targeted entries become clean * (1 + fraction), or clean + fraction *
/// kFullScale in full-scale mode. Other entries are untouched.
Eigen::VectorXd inject_bad_data(const Eigen::VectorXd& observed, const Eigen::VectorXd& clean,
                                const AnomalySpec& spec);

/// Multiplies P and Q at each targeted bus by (1 - fraction).
OperatingPoint apply_sudden_load_change(const OperatingPoint& loads, const AnomalySpec& spec);

struct StealthAttack {
    Eigen::VectorXd attack;          // a = h(x^ + c) - h(x^)
    Eigen::VectorXd attacked_state;  // x^ + c
};

/// `offset` is c in packed state layout. Rejects offsets spanning more than
/// kMaxAttackedBuses buses.
StealthAttack build_stealth_attack(const Eigen::VectorXd& estimate, const Eigen::VectorXd& offset,
                                   const MeasurementModel& model);

Eigen::VectorXd apply_attack(const Eigen::VectorXd& observed, const Eigen::VectorXd& attack);

/// Ground-truth trajectory with noise, anomalies and per-step labels. Uses
/// the default full metering plan. Throws DivergenceError / NumericalError
/// naming the failing step.
ScenarioTrace generate_trajectory(const NetworkTopology& topology, const LoadProfile& profile,
                                  const std::vector<AnomalySpec>& specs, std::uint64_t seed,
                                  const SimulationOptions& options = {});

// JSON forms. Targets are written by name ("V14", "theta10", "Pinj14", bus id).
nlohmann::json spec_to_json(const AnomalySpec& spec, const NetworkTopology& topology,
                            const MeasurementPlan& plan);
AnomalySpec spec_from_json(const nlohmann::json& doc, const NetworkTopology& topology,
                           const MeasurementPlan& plan);

/// A fully resolved scenario: what `simulate` runs for one trace.
struct ScenarioConfig {
    nlohmann::json topology = 0;
    int topology_id = 0;
    double profile_start = 1.0;
    double profile_end = 0.95;
    int steps = 100;
    nlohmann::json anomalies = nlohmann::json::array();
    std::uint64_t seed = 0;
    double sigma = 0.01;
    bool allow_concurrent = false;
    std::string name;

    nlohmann::json to_json() const;
    static ScenarioConfig from_json(const nlohmann::json& doc);
};

ScenarioTrace run_scenario(const ScenarioConfig& config);

}  // namespace gridad
