#include "gridad/power_flow.hpp"

#include <cmath>

#include "gridad/error.hpp"

namespace gridad {

OperatingPoint OperatingPoint::nominal(const NetworkTopology& topology) {
    const int n = topology.bus_count();
    OperatingPoint op{Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n),
                      Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
    for (int i = 0; i < n; ++i) {
        const auto& b = topology.buses()[i];
        op.p_load(i) = b.p_load;
        op.q_load(i) = b.q_load;
        op.p_gen(i) = b.p_gen;
        op.v_set(i) = b.v_set;
    }
    return op;
}

PowerFlowResult solve_power_flow(const NetworkTopology& topology, const OperatingPoint& point,
                                 const std::optional<StateVector>& warm_start,
                                 const PowerFlowOptions& options) {
    const int n = topology.bus_count();
    const StateLayout layout(topology);

    // Equations: P at every non-slack bus, Q at every load bus. Unknowns: the
    // matching angles and load-bus magnitudes.
    MeasurementPlan equations;
    std::vector<int> unknown_cols;
    Eigen::VectorXd specified;
    std::vector<double> spec;
    for (int b = 0; b < n; ++b) {
        if (b == topology.slack()) continue;
        equations.items.push_back({MeasurementType::Pinj, b, -1, BranchEnd::From, 1.0});
        spec.push_back(point.p_gen(b) - point.p_load(b));
        unknown_cols.push_back(*layout.angle_col(b));
    }
    for (int b = 0; b < n; ++b) {
        if (topology.buses()[b].kind != BusKind::Load) continue;
        equations.items.push_back({MeasurementType::Qinj, b, -1, BranchEnd::From, 1.0});
        spec.push_back(-point.q_load(b));
        unknown_cols.push_back(layout.magnitude_col(b));
    }
    specified = Eigen::Map<Eigen::VectorXd>(spec.data(), static_cast<Eigen::Index>(spec.size()));
    const MeasurementModel model(topology, equations);

    StateVector start = warm_start.value_or(StateVector::flat(n));
    for (int b = 0; b < n; ++b)
        if (topology.buses()[b].kind != BusKind::Load) start.magnitude(b) = point.v_set(b);
    start.angle(topology.slack()) = 0.0;
    Eigen::VectorXd x = start.pack(layout);

    const int k = static_cast<int>(unknown_cols.size());
    double mismatch = 0.0;
    int it = 0;
    for (;; ++it) {
        const Eigen::VectorXd f = specified - model.evaluate(x);
        mismatch = f.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(mismatch))
            throw DivergenceError("power flow produced non-finite mismatch", mismatch);
        if (mismatch < options.tolerance) break;
        if (it == options.max_iterations)
            throw DivergenceError("power flow did not converge in " +
                                      std::to_string(options.max_iterations) +
                                      " iterations (mismatch " + std::to_string(mismatch) + ")",
                                  mismatch);
        const Eigen::MatrixXd full = model.jacobian(x);
        Eigen::MatrixXd jac(k, k);
        for (int c = 0; c < k; ++c) jac.col(c) = full.col(unknown_cols[c]);
        const Eigen::VectorXd dx = jac.partialPivLu().solve(f);
        for (int c = 0; c < k; ++c) x(unknown_cols[c]) += dx(c);
    }

    PowerFlowResult result;
    result.state = StateVector::unpack(x, layout);
    result.iterations = it;
    result.mismatch = mismatch;
    const MeasurementModel nodal(topology, MeasurementPlan{});
    nodal.injections(result.state, result.p_injection, result.q_injection);
    return result;
}

}  // namespace gridad
