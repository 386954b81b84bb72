#include "gridad/network.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "gridad/error.hpp"
#include "ieee14_data.hpp"

namespace gridad {

std::string to_string(BusKind kind) {
    switch (kind) {
        case BusKind::Slack: return "slack";
        case BusKind::Generator: return "generator";
        case BusKind::Load: return "load";
    }
    return "load";
}

BusKind bus_kind_from_string(const std::string& text) {
    if (text == "slack") return BusKind::Slack;
    if (text == "generator" || text == "pv") return BusKind::Generator;
    if (text == "load" || text == "pq") return BusKind::Load;
    throw DataError("unknown bus kind '" + text + "'");
}

NetworkTopology::NetworkTopology(std::vector<Bus> buses, std::vector<Branch> branches)
    : buses_(std::move(buses)), branches_(std::move(branches)) {
    if (buses_.empty()) throw DataError("network has no buses");
    int slack_count = 0;
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        if (buses_[i].id != static_cast<int>(i) + 1)
            throw DataError("bus ids must be contiguous from 1; found " +
                            std::to_string(buses_[i].id) + " at position " +
                            std::to_string(i + 1));
        if (buses_[i].kind == BusKind::Slack) {
            slack_ = static_cast<int>(i);
            ++slack_count;
        }
    }
    if (slack_count != 1)
        throw DataError("network must have exactly one slack bus, found " +
                        std::to_string(slack_count));
    const int n = bus_count();
    for (const auto& br : branches_) {
        if (br.from < 1 || br.from > n || br.to < 1 || br.to > n)
            throw DataError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                            " references a missing bus");
        if (br.from == br.to)
            throw DataError("branch at bus " + std::to_string(br.from) + " is a self loop");
        if (std::abs(br.impedance) == 0.0)
            throw DataError("branch " + std::to_string(br.from) + "-" + std::to_string(br.to) +
                            " has zero series impedance");
    }
    if (!spans_all_buses())
        throw ObservabilityError("connected branches do not span all buses");
}

int NetworkTopology::index_of(int bus_id) const {
    if (bus_id < 1 || bus_id > bus_count())
        throw DataError("bus id " + std::to_string(bus_id) + " out of range");
    return bus_id - 1;
}

std::vector<int> NetworkTopology::connected_branches() const {
    std::vector<int> out;
    for (std::size_t k = 0; k < branches_.size(); ++k)
        if (branches_[k].connected()) out.push_back(static_cast<int>(k));
    return out;
}

bool NetworkTopology::spans_all_buses() const {
    const int n = bus_count();
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    };
    int components = n;
    for (const auto& br : branches_) {
        if (!br.connected()) continue;
        int a = find(br.from - 1), b = find(br.to - 1);
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

Eigen::MatrixXcd build_admittance(const NetworkTopology& topology) {
    if (!topology.spans_all_buses())
        throw ObservabilityError("connected branches do not span all buses");
    const int n = topology.bus_count();
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (const auto& br : topology.branches()) {
        if (!br.connected()) continue;
        const int i = br.from - 1, j = br.to - 1;
        const Complex ys = br.series_admittance();
        const Complex half_charge{0.0, br.charging / 2.0};
        y(i, i) += ys + half_charge;
        y(j, j) += ys + half_charge;
        y(i, j) -= ys;
        y(j, i) -= ys;
    }
    for (int i = 0; i < n; ++i) y(i, i) += topology.buses()[i].shunt;
    return y;
}

NetworkTopology apply_topology_change(const NetworkTopology& topology,
                                      std::pair<int, int> disconnect,
                                      const LineConnection& connect) {
    auto branches = topology.branches();
    auto removed = std::find_if(branches.begin(), branches.end(), [&](const Branch& br) {
        return br.connected() && br.joins(disconnect.first, disconnect.second);
    });
    if (removed == branches.end())
        throw DataError("no connected branch " + std::to_string(disconnect.first) + "-" +
                        std::to_string(disconnect.second) + " to disconnect");
    const int n = topology.bus_count();
    if (connect.from < 1 || connect.from > n || connect.to < 1 || connect.to > n ||
        connect.from == connect.to)
        throw DataError("invalid endpoints for new branch " + std::to_string(connect.from) +
                        "-" + std::to_string(connect.to));

    const Complex z = connect.impedance.value_or(removed->impedance);
    const double b = connect.impedance ? connect.charging : removed->charging;
    removed->status = BranchStatus::Disconnected;

    auto dormant = std::find_if(branches.begin(), branches.end(), [&](const Branch& br) {
        return !br.connected() && br.joins(connect.from, connect.to) && br.impedance == z &&
               br.charging == b;
    });
    if (dormant != branches.end()) {
        dormant->status = BranchStatus::Connected;
    } else {
        branches.push_back(Branch{connect.from, connect.to, z, b, BranchStatus::Connected});
    }
    return NetworkTopology(topology.buses(), std::move(branches));
}

NetworkTopology topology_from_json(const nlohmann::json& doc) {
    try {
        std::vector<Bus> buses;
        for (const auto& jb : doc.at("buses")) {
            Bus b;
            b.id = jb.at("id").get<int>();
            b.kind = bus_kind_from_string(jb.at("kind").get<std::string>());
            b.p_load = jb.value("p_load", 0.0);
            b.q_load = jb.value("q_load", 0.0);
            b.shunt = Complex{jb.value("shunt_g", 0.0), jb.value("shunt_b", 0.0)};
            b.p_gen = jb.value("p_gen", 0.0);
            b.v_set = jb.value("v_set", 1.0);
            buses.push_back(b);
        }
        std::sort(buses.begin(), buses.end(),
                  [](const Bus& a, const Bus& b) { return a.id < b.id; });
        std::vector<Branch> branches;
        for (const auto& jl : doc.at("branches")) {
            Branch br;
            br.from = jl.at("from").get<int>();
            br.to = jl.at("to").get<int>();
            br.impedance = Complex{jl.value("r", 0.0), jl.at("x").get<double>()};
            br.charging = jl.value("b", 0.0);
            const auto status = jl.value("status", std::string("connected"));
            if (status == "connected" || status == "1")
                br.status = BranchStatus::Connected;
            else if (status == "disconnected" || status == "0")
                br.status = BranchStatus::Disconnected;
            else
                throw DataError("unknown branch status '" + status + "'");
            branches.push_back(br);
        }
        return NetworkTopology(std::move(buses), std::move(branches));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("network file: ") + e.what());
    }
}

nlohmann::json topology_to_json(const NetworkTopology& topology) {
    nlohmann::json doc;
    doc["base_mva"] = 100.0;
    auto& buses = doc["buses"] = nlohmann::json::array();
    for (const auto& b : topology.buses()) {
        nlohmann::json jb{{"id", b.id},
                          {"kind", to_string(b.kind)},
                          {"p_load", b.p_load},
                          {"q_load", b.q_load},
                          {"shunt_b", b.shunt.imag()}};
        if (b.shunt.real() != 0.0) jb["shunt_g"] = b.shunt.real();
        if (b.kind != BusKind::Load) {
            jb["p_gen"] = b.p_gen;
            jb["v_set"] = b.v_set;
        }
        buses.push_back(jb);
    }
    auto& branches = doc["branches"] = nlohmann::json::array();
    for (const auto& br : topology.branches()) {
        branches.push_back({{"from", br.from},
                            {"to", br.to},
                            {"r", br.impedance.real()},
                            {"x", br.impedance.imag()},
                            {"b", br.charging},
                            {"status", br.connected() ? "connected" : "disconnected"}});
    }
    return doc;
}

NetworkTopology load_topology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open network file '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("network file '" + path + "': " + e.what());
    }
    return topology_from_json(doc);
}

const NetworkTopology& ieee14() {
    static const NetworkTopology base = topology_from_json(nlohmann::json::parse(kIeee14Json));
    return base;
}

NetworkTopology catalog_topology(int id) {
    struct Swap {
        std::pair<int, int> off;
        std::pair<int, int> on;
    };
    static constexpr Swap kSwaps[] = {{{5, 6}, {1, 6}},
                                      {{6, 13}, {6, 14}},
                                      {{4, 9}, {4, 10}},
                                      {{2, 4}, {3, 5}}};
    if (id == 0) return ieee14();
    if (id < 1 || id >= kTopologyCount)
        throw UsageError("topology id must be in 0.." + std::to_string(kTopologyCount - 1));
    const auto& s = kSwaps[id - 1];
    return apply_topology_change(ieee14(), s.off, LineConnection{s.on.first, s.on.second, std::nullopt, 0.0});
}

NetworkTopology resolve_topology(const nlohmann::json& field, int* id_out) {
    if (field.is_number_integer()) {
        const int id = field.get<int>();
        if (id_out) *id_out = id;
        return catalog_topology(id);
    }
    if (field.is_string()) {
        const auto text = field.get<std::string>();
        if (text == "base" || text == "ieee14") {
            if (id_out) *id_out = 0;
            return ieee14();
        }
        if (id_out) *id_out = -1;
        return load_topology(text);
    }
    if (field.is_object()) {
        if (id_out) *id_out = field.value("id", -1);
        return topology_from_json(field);
    }
    throw UsageError("topology must be a catalog id, 'base', a path or an inline network");
}

}  // namespace gridad
