#pragma once

#include <optional>

#include <Eigen/Dense>

#include "gridad/measurement.hpp"
#include "gridad/network.hpp"

namespace gridad {

/// Per-bus loads and generator set-points (per-unit).
struct OperatingPoint {
    Eigen::VectorXd p_load;
    Eigen::VectorXd q_load;
    Eigen::VectorXd p_gen;
    Eigen::VectorXd v_set;

    /// Nominal loads and set-points as stored in the topology.
    static OperatingPoint nominal(const NetworkTopology& topology);
};

struct PowerFlowOptions {
    double tolerance = 1e-8;
    int max_iterations = 20;
};

struct PowerFlowResult {
    StateVector state;
    int iterations = 0;
    double mismatch = 0.0;
    Eigen::VectorXd p_injection;
    Eigen::VectorXd q_injection;

    double slack_p(const NetworkTopology& t) const { return p_injection(t.slack()); }
};

/// Newton-Raphson AC power flow. Slack holds V and angle 0; generator buses
/// hold V and P; load buses hold P and Q. No reactive limits.
/// Throws DivergenceError (with the final mismatch) after the iteration cap.
PowerFlowResult solve_power_flow(const NetworkTopology& topology, const OperatingPoint& point,
                                 const std::optional<StateVector>& warm_start = std::nullopt,
                                 const PowerFlowOptions& options = {});

}  // namespace gridad
