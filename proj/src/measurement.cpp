#include "gridad/measurement.hpp"

#include <cmath>

#include "gridad/error.hpp"

namespace gridad {

std::string StateLayout::name(int col) const {
    const int bus = bus_of(col) + 1;
    return (is_angle(col) ? "theta" : "V") + std::to_string(bus);
}

int StateLayout::parse(const std::string& text) const {
    auto bus_from = [&](std::size_t prefix) {
        try {
            const int id = std::stoi(text.substr(prefix));
            if (id < 1 || id > buses_) throw DataError("");
            return id - 1;
        } catch (const std::exception&) {
            throw DataError("bad state reference '" + text + "'");
        }
    };
    if (text.rfind("theta", 0) == 0) {
        auto col = angle_col(bus_from(5));
        if (!col) throw DataError("'" + text + "' is the slack angle, which is not a state");
        return *col;
    }
    if (text.rfind("V", 0) == 0) return magnitude_col(bus_from(1));
    try {
        const int col = std::stoi(text);
        if (col >= 0 && col < dim()) return col;
    } catch (const std::exception&) {
    }
    throw DataError("bad state reference '" + text + "'");
}

StateVector StateVector::flat(int buses) {
    return {Eigen::VectorXd::Zero(buses), Eigen::VectorXd::Ones(buses)};
}

Eigen::VectorXd StateVector::pack(const StateLayout& layout) const {
    Eigen::VectorXd x(layout.dim());
    for (int b = 0; b < layout.buses(); ++b) {
        if (auto c = layout.angle_col(b)) x(*c) = angle(b);
        x(layout.magnitude_col(b)) = magnitude(b);
    }
    return x;
}

StateVector StateVector::unpack(const Eigen::VectorXd& x, const StateLayout& layout) {
    StateVector s = flat(layout.buses());
    for (int b = 0; b < layout.buses(); ++b) {
        if (auto c = layout.angle_col(b)) s.angle(b) = x(*c);
        s.magnitude(b) = x(layout.magnitude_col(b));
    }
    return s;
}

std::string to_string(MeasurementType type) {
    switch (type) {
        case MeasurementType::V: return "V";
        case MeasurementType::Pinj: return "Pinj";
        case MeasurementType::Qinj: return "Qinj";
        case MeasurementType::Pflow: return "Pflow";
        case MeasurementType::Qflow: return "Qflow";
    }
    return "?";
}

Eigen::VectorXd MeasurementPlan::sigmas() const {
    Eigen::VectorXd s(size());
    for (int i = 0; i < size(); ++i) s(i) = items[i].sigma;
    return s;
}

Eigen::VectorXd MeasurementPlan::variances() const { return sigmas().array().square(); }

std::optional<int> MeasurementPlan::find_nodal(MeasurementType type, int bus) const {
    for (int i = 0; i < size(); ++i)
        if (items[i].type == type && items[i].bus == bus && !items[i].is_flow()) return i;
    return std::nullopt;
}

std::string MeasurementPlan::label(int row, const NetworkTopology& topology) const {
    const auto& m = items.at(row);
    if (!m.is_flow()) return to_string(m.type) + std::to_string(m.bus + 1);
    const auto& br = topology.branches().at(m.branch);
    const int a = m.end == BranchEnd::From ? br.from : br.to;
    const int b = m.end == BranchEnd::From ? br.to : br.from;
    return to_string(m.type) + std::to_string(a) + "-" + std::to_string(b);
}

MeasurementPlan default_plan(const NetworkTopology& topology, double sigma) {
    MeasurementPlan plan;
    const int n = topology.bus_count();
    for (auto type : {MeasurementType::V, MeasurementType::Pinj, MeasurementType::Qinj})
        for (int b = 0; b < n; ++b) plan.items.push_back({type, b, -1, BranchEnd::From, sigma});
    for (int k : topology.connected_branches()) {
        const auto& br = topology.branches()[k];
        plan.items.push_back({MeasurementType::Pflow, br.from - 1, k, BranchEnd::From, sigma});
        plan.items.push_back({MeasurementType::Qflow, br.from - 1, k, BranchEnd::From, sigma});
        plan.items.push_back({MeasurementType::Pflow, br.to - 1, k, BranchEnd::To, sigma});
        plan.items.push_back({MeasurementType::Qflow, br.to - 1, k, BranchEnd::To, sigma});
    }
    return plan;
}

nlohmann::json plan_to_json(const MeasurementPlan& plan, const NetworkTopology& topology) {
    auto out = nlohmann::json::array();
    for (int i = 0; i < plan.size(); ++i)
        out.push_back({{"label", plan.label(i, topology)}, {"sigma", plan.items[i].sigma}});
    return out;
}

MeasurementModel::MeasurementModel(NetworkTopology topology, MeasurementPlan plan)
    : topology_(std::move(topology)),
      plan_(std::move(plan)),
      layout_(topology_),
      ybus_(build_admittance(topology_)),
      variances_(plan_.variances()) {
    const int n = topology_.bus_count();
    neighbours_.resize(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && std::abs(ybus_(i, j)) > 0.0) neighbours_[i].push_back(j);
    for (const auto& m : plan_.items) {
        if (m.bus < 0 || m.bus >= n) throw DataError("measurement references a missing bus");
        if (m.is_flow()) {
            if (m.branch < 0 || m.branch >= static_cast<int>(topology_.branches().size()) ||
                !topology_.branches()[m.branch].connected())
                throw DataError("flow measurement on a missing or disconnected branch");
        }
        if (!(m.sigma > 0.0)) throw DataError("measurement standard deviation must be positive");
    }
}

void MeasurementModel::injections(const StateVector& s, Eigen::VectorXd& p,
                                  Eigen::VectorXd& q) const {
    const int n = topology_.bus_count();
    p.setZero(n);
    q.setZero(n);
    for (int i = 0; i < n; ++i) {
        const double gii = ybus_(i, i).real(), bii = ybus_(i, i).imag();
        double pi = s.magnitude(i) * gii, qi = -s.magnitude(i) * bii;
        for (int j : neighbours_[i]) {
            const double g = ybus_(i, j).real(), b = ybus_(i, j).imag();
            const double th = s.angle(i) - s.angle(j);
            pi += s.magnitude(j) * (g * std::cos(th) + b * std::sin(th));
            qi += s.magnitude(j) * (g * std::sin(th) - b * std::cos(th));
        }
        p(i) = s.magnitude(i) * pi;
        q(i) = s.magnitude(i) * qi;
    }
}

namespace {

struct FlowTerms {
    int i, j;           // metered end, far end
    double g, b, shunt; // series conductance/susceptance, half charging
};

FlowTerms flow_terms(const Branch& br, BranchEnd end) {
    const Complex ys = br.series_admittance();
    const int i = (end == BranchEnd::From ? br.from : br.to) - 1;
    const int j = (end == BranchEnd::From ? br.to : br.from) - 1;
    return {i, j, ys.real(), ys.imag(), br.charging / 2.0};
}

}  // namespace

Eigen::VectorXd MeasurementModel::evaluate(const Eigen::VectorXd& x) const {
    const auto s = StateVector::unpack(x, layout_);
    Eigen::VectorXd p, q;
    injections(s, p, q);
    Eigen::VectorXd h(plan_.size());
    for (int r = 0; r < plan_.size(); ++r) {
        const auto& m = plan_.items[r];
        switch (m.type) {
            case MeasurementType::V: h(r) = s.magnitude(m.bus); break;
            case MeasurementType::Pinj: h(r) = p(m.bus); break;
            case MeasurementType::Qinj: h(r) = q(m.bus); break;
            case MeasurementType::Pflow:
            case MeasurementType::Qflow: {
                const auto f = flow_terms(topology_.branches()[m.branch], m.end);
                const double vi = s.magnitude(f.i), vj = s.magnitude(f.j);
                const double th = s.angle(f.i) - s.angle(f.j);
                const double c = std::cos(th), sn = std::sin(th);
                if (m.type == MeasurementType::Pflow)
                    h(r) = vi * vi * f.g - vi * vj * (f.g * c + f.b * sn);
                else
                    h(r) = -vi * vi * (f.b + f.shunt) - vi * vj * (f.g * sn - f.b * c);
                break;
            }
        }
    }
    return h;
}

Eigen::MatrixXd MeasurementModel::jacobian(const Eigen::VectorXd& x) const {
    const auto s = StateVector::unpack(x, layout_);
    Eigen::VectorXd p, q;
    injections(s, p, q);
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(plan_.size(), layout_.dim());
    auto put_angle = [&](int row, int bus, double value) {
        if (auto c = layout_.angle_col(bus)) jac(row, *c) += value;
    };
    auto put_mag = [&](int row, int bus, double value) {
        jac(row, layout_.magnitude_col(bus)) += value;
    };

    for (int r = 0; r < plan_.size(); ++r) {
        const auto& m = plan_.items[r];
        const int i = m.bus;
        const double vi = s.magnitude(i);
        switch (m.type) {
            case MeasurementType::V: put_mag(r, i, 1.0); break;
            case MeasurementType::Pinj: {
                const double gii = ybus_(i, i).real(), bii = ybus_(i, i).imag();
                put_angle(r, i, -q(i) - bii * vi * vi);
                put_mag(r, i, p(i) / vi + gii * vi);
                for (int j : neighbours_[i]) {
                    const double g = ybus_(i, j).real(), b = ybus_(i, j).imag();
                    const double th = s.angle(i) - s.angle(j);
                    const double c = std::cos(th), sn = std::sin(th);
                    put_angle(r, j, vi * s.magnitude(j) * (g * sn - b * c));
                    put_mag(r, j, vi * (g * c + b * sn));
                }
                break;
            }
            case MeasurementType::Qinj: {
                const double gii = ybus_(i, i).real(), bii = ybus_(i, i).imag();
                put_angle(r, i, p(i) - gii * vi * vi);
                put_mag(r, i, q(i) / vi - bii * vi);
                for (int j : neighbours_[i]) {
                    const double g = ybus_(i, j).real(), b = ybus_(i, j).imag();
                    const double th = s.angle(i) - s.angle(j);
                    const double c = std::cos(th), sn = std::sin(th);
                    put_angle(r, j, -vi * s.magnitude(j) * (g * c + b * sn));
                    put_mag(r, j, vi * (g * sn - b * c));
                }
                break;
            }
            case MeasurementType::Pflow:
            case MeasurementType::Qflow: {
                const auto f = flow_terms(topology_.branches()[m.branch], m.end);
                const double vj = s.magnitude(f.j);
                const double th = s.angle(f.i) - s.angle(f.j);
                const double c = std::cos(th), sn = std::sin(th);
                if (m.type == MeasurementType::Pflow) {
                    const double dth = vi * vj * (f.g * sn - f.b * c);
                    put_angle(r, f.i, dth);
                    put_angle(r, f.j, -dth);
                    put_mag(r, f.i, 2.0 * vi * f.g - vj * (f.g * c + f.b * sn));
                    put_mag(r, f.j, -vi * (f.g * c + f.b * sn));
                } else {
                    const double dth = -vi * vj * (f.g * c + f.b * sn);
                    put_angle(r, f.i, dth);
                    put_angle(r, f.j, -dth);
                    put_mag(r, f.i, -2.0 * vi * (f.b + f.shunt) - vj * (f.g * sn - f.b * c));
                    put_mag(r, f.j, -vi * (f.g * sn - f.b * c));
                }
                break;
            }
        }
    }
    return jac;
}

Eigen::VectorXd evaluate_measurements(const StateVector& state, const NetworkTopology& topology,
                                      const MeasurementPlan& plan) {
    MeasurementModel model(topology, plan);
    return model.evaluate(state.pack(model.layout()));
}

Eigen::MatrixXd measurement_jacobian(const StateVector& state, const NetworkTopology& topology,
                                     const MeasurementPlan& plan) {
    MeasurementModel model(topology, plan);
    return model.jacobian(state.pack(model.layout()));
}

}  // namespace gridad
