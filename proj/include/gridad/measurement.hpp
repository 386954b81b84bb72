#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridad/network.hpp"

namespace gridad {

/// Packed state layout: angles of every non-slack bus (bus order), then the
/// magnitudes of all buses. Dimension 2N-1.
class StateLayout {
public:
    StateLayout() = default;
    StateLayout(int buses, int slack) : buses_(buses), slack_(slack) {}
    explicit StateLayout(const NetworkTopology& t) : StateLayout(t.bus_count(), t.slack()) {}

    int buses() const { return buses_; }
    int slack() const { return slack_; }
    int dim() const { return 2 * buses_ - 1; }

    /// Column of bus `bus`'s angle, or nullopt for the slack bus.
    std::optional<int> angle_col(int bus) const {
        if (bus == slack_) return std::nullopt;
        return bus < slack_ ? bus : bus - 1;
    }
    int magnitude_col(int bus) const { return buses_ - 1 + bus; }

    bool is_angle(int col) const { return col < buses_ - 1; }
    /// Bus (0-based) owning packed column `col`.
    int bus_of(int col) const {
        if (col >= buses_ - 1) return col - (buses_ - 1);
        return col < slack_ ? col : col + 1;
    }
    /// Human-readable name such as "theta10" or "V14" (1-based bus ids).
    std::string name(int col) const;
    /// Inverse of `name`; also accepts a plain integer column.
    int parse(const std::string& text) const;

private:
    int buses_ = 0;
    int slack_ = 0;
};

/// Unpacked bus voltages. `angle[slack]` is the reference and always 0.
struct StateVector {
    Eigen::VectorXd angle;
    Eigen::VectorXd magnitude;

    static StateVector flat(int buses);
    Eigen::VectorXd pack(const StateLayout& layout) const;
    static StateVector unpack(const Eigen::VectorXd& x, const StateLayout& layout);
};

enum class MeasurementType { V, Pinj, Qinj, Pflow, Qflow };

std::string to_string(MeasurementType type);

enum class BranchEnd { From, To };

struct Measurement {
    MeasurementType type = MeasurementType::V;
    int bus = 0;     // 0-based; for flows, the metered end's bus
    int branch = -1; // index into topology branches; flows only
    BranchEnd end = BranchEnd::From;
    double sigma = 0.01;

    bool is_flow() const { return type == MeasurementType::Pflow || type == MeasurementType::Qflow; }
};

/// Ordered measurement descriptors; the order is the row order of z, R and H.
struct MeasurementPlan {
    std::vector<Measurement> items;

    int size() const { return static_cast<int>(items.size()); }
    Eigen::VectorXd sigmas() const;
    Eigen::VectorXd variances() const;
    /// Row of a nodal measurement, or nullopt if the plan does not carry it.
    std::optional<int> find_nodal(MeasurementType type, int bus) const;
    /// Short label, e.g. "V14", "Pinj3", "Pflow9-14".
    std::string label(int row, const NetworkTopology& topology) const;
};

/// V, P and Q injection at every bus (in that block order, bus order inside
/// each block), then P and Q flow at both ends of every connected branch.
MeasurementPlan default_plan(const NetworkTopology& topology, double sigma = 0.01);

nlohmann::json plan_to_json(const MeasurementPlan& plan, const NetworkTopology& topology);

/// h(x) and H(x) for a fixed topology and plan. Immutable after construction.
class MeasurementModel {
public:
    MeasurementModel(NetworkTopology topology, MeasurementPlan plan);

    const NetworkTopology& topology() const { return topology_; }
    const MeasurementPlan& plan() const { return plan_; }
    const StateLayout& layout() const { return layout_; }
    const Eigen::MatrixXcd& admittance() const { return ybus_; }
    const Eigen::VectorXd& variances() const { return variances_; }
    int measurements() const { return plan_.size(); }
    int states() const { return layout_.dim(); }

    Eigen::VectorXd evaluate(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;

    /// P and Q injections at every bus.
    void injections(const StateVector& s, Eigen::VectorXd& p, Eigen::VectorXd& q) const;

private:
    NetworkTopology topology_;
    MeasurementPlan plan_;
    StateLayout layout_;
    Eigen::MatrixXcd ybus_;
    Eigen::VectorXd variances_;
    std::vector<std::vector<int>> neighbours_;
};

/// Convenience wrappers that build a one-off model.
Eigen::VectorXd evaluate_measurements(const StateVector& state, const NetworkTopology& topology,
                                      const MeasurementPlan& plan);
Eigen::MatrixXd measurement_jacobian(const StateVector& state, const NetworkTopology& topology,
                                     const MeasurementPlan& plan);

}  // namespace gridad
