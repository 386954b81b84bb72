#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace gridad {

using Complex = std::complex<double>;

enum class BusKind { Slack, Generator, Load };

std::string to_string(BusKind kind);
BusKind bus_kind_from_string(const std::string& text);

/// A network node. Quantities are per-unit on a 100 MVA base.
struct Bus {
    int id = 0;  // 1-based, contiguous
    BusKind kind = BusKind::Load;
    double p_load = 0.0;
    double q_load = 0.0;
    Complex shunt{0.0, 0.0};
    // Generator set-points; ignored for load buses.
    double p_gen = 0.0;
    double v_set = 1.0;

    bool operator==(const Bus&) const = default;
};

enum class BranchStatus { Connected, Disconnected };

/// Pi-model line: series impedance plus total charging susceptance split
/// equally between the two ends.
struct Branch {
    int from = 0;
    int to = 0;
    Complex impedance{0.0, 0.0};
    double charging = 0.0;
    BranchStatus status = BranchStatus::Connected;

    bool connected() const { return status == BranchStatus::Connected; }
    Complex series_admittance() const { return 1.0 / impedance; }
    bool joins(int a, int b) const {
        return (from == a && to == b) || (from == b && to == a);
    }
    bool operator==(const Branch&) const = default;
};

class NetworkTopology {
public:
    NetworkTopology() = default;

    /// Validates the invariants (contiguous ids, single slack, no self loops,
    /// nonzero impedances, connected graph). Throws DataError or
    /// ObservabilityError.
    NetworkTopology(std::vector<Bus> buses, std::vector<Branch> branches);

    const std::vector<Bus>& buses() const { return buses_; }
    const std::vector<Branch>& branches() const { return branches_; }
    int bus_count() const { return static_cast<int>(buses_.size()); }
    /// 0-based index of the slack bus.
    int slack() const { return slack_; }
    /// 0-based index of the bus with the given 1-based id.
    int index_of(int bus_id) const;

    /// Indices of branches that are currently connected.
    std::vector<int> connected_branches() const;

    /// Whether the connected-branch graph spans every bus.
    bool spans_all_buses() const;

    bool operator==(const NetworkTopology&) const = default;

private:
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    int slack_ = 0;
};

/// Standard Y-bus. Disconnected branches contribute nothing.
/// Throws ObservabilityError when the connected graph does not span all buses.
Eigen::MatrixXcd build_admittance(const NetworkTopology& topology);

/// Line to connect during a topology change. When `impedance` is empty the
/// impedance and charging of the disconnected line are reused.
struct LineConnection {
    int from = 0;
    int to = 0;
    std::optional<Complex> impedance;
    double charging = 0.0;
};

/// Returns a copy of `topology` with the branch joining `disconnect` switched
/// out and `connect` switched in. If a disconnected record for the new pair
/// already exists it is reconnected instead of duplicated.
NetworkTopology apply_topology_change(const NetworkTopology& topology,
                                      std::pair<int, int> disconnect,
                                      const LineConnection& connect);

NetworkTopology topology_from_json(const nlohmann::json& doc);
nlohmann::json topology_to_json(const NetworkTopology& topology);
NetworkTopology load_topology(const std::string& path);

/// Bundled IEEE 14-bus case in the network file schema.
const NetworkTopology& ieee14();

/// Number of topologies in the standard catalog (base case plus four
/// line-switching variants).
inline constexpr int kTopologyCount = 5;

/// Topology `id` of the catalog: 0 is the IEEE 14-bus base case, 1..4 swap one
/// line each (5-6 -> 1-6, 6-13 -> 6-14, 4-9 -> 4-10, 2-4 -> 3-5).
NetworkTopology catalog_topology(int id);

/// Resolves a scenario `topology` field: an integer catalog id or a path.
NetworkTopology resolve_topology(const nlohmann::json& field, int* id_out = nullptr);

}  // namespace gridad
