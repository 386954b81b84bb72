#include <cmath>

#include <gtest/gtest.h>

#include "gridad/error.hpp"
#include "gridad/measurement.hpp"
#include "gridad/network.hpp"
#include "gridad/power_flow.hpp"
#include "helpers.hpp"

using namespace gridad;
using gridad::testing::random_state;
using gridad::testing::two_bus;

namespace {

// Textbook pi-model assembly straight from the branch list.
Eigen::MatrixXcd reference_ybus(const NetworkTopology& t) {
    const int n = t.bus_count();
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < n; ++k) y(k, k) += t.buses()[k].shunt;
    for (const auto& br : t.branches()) {
        if (br.status != BranchStatus::Connected) continue;
        const int f = t.index_of(br.from), o = t.index_of(br.to);
        const Complex ys = Complex(1.0, 0.0) / br.impedance;
        const Complex half(0.0, br.charging / 2.0);
        y(f, f) += ys + half;
        y(o, o) += ys + half;
        y(f, o) -= ys;
        y(o, f) -= ys;
    }
    return y;
}

}  // namespace

TEST(Admittance, SingleSeriesBranch) {
    const auto y = build_admittance(two_bus(0.1));
    EXPECT_NEAR(std::abs(y(0, 0) - Complex(0, -10)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(y(0, 1) - Complex(0, 10)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(y(1, 0) - Complex(0, 10)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(y(1, 1) - Complex(0, -10)), 0.0, 1e-12);
}

TEST(Admittance, SymmetricWithShuntRowSums) {
    for (int id = 0; id < kTopologyCount; ++id) {
        const auto t = catalog_topology(id);
        const auto y = build_admittance(t);
        EXPECT_LT((y - y.transpose()).cwiseAbs().maxCoeff(), 1e-12) << "topology " << id;
        for (int k = 0; k < t.bus_count(); ++k) {
            Complex shunt = t.buses()[k].shunt;
            for (const auto& br : t.branches())
                if (br.connected() && (t.index_of(br.from) == k || t.index_of(br.to) == k))
                    shunt += Complex(0.0, br.charging / 2.0);
            EXPECT_LT(std::abs(y.row(k).sum() - shunt), 1e-9) << "bus " << k + 1;
        }
    }
}

TEST(Admittance, Ieee14MatchesIndependentBuilder) {
    const auto& t = ieee14();
    EXPECT_EQ(t.bus_count(), 14);
    EXPECT_LT((build_admittance(t) - reference_ybus(t)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(TopologyChange, CatalogEntriesDifferInTwoBranches) {
    const auto& base = ieee14();
    struct Case { int id; std::pair<int, int> off, on; };
    // topologies 1 and 4 as listed in the study's table
    for (const Case& c : {Case{1, {5, 6}, {1, 6}}, Case{4, {2, 4}, {3, 5}}}) {
        const auto t = catalog_topology(c.id);
        int removed = 0, added = 0;
        for (const auto& br : base.branches())
            if (br.joins(c.off.first, c.off.second)) {
                bool still = false;
                for (const auto& b2 : t.branches())
                    if (b2.joins(c.off.first, c.off.second) && b2.connected()) still = true;
                removed += !still;
            }
        for (const auto& br : t.branches())
            if (br.connected() && br.joins(c.on.first, c.on.second)) ++added;
        EXPECT_EQ(removed, 1) << "topology " << c.id;
        EXPECT_EQ(added, 1) << "topology " << c.id;

        int differing = 0;
        const auto yb = build_admittance(base), yt = build_admittance(t);
        for (int i = 0; i < 14; ++i)
            for (int j = i + 1; j < 14; ++j)
                if (std::abs(yb(i, j) - yt(i, j)) > 1e-12) ++differing;
        EXPECT_EQ(differing, 2) << "topology " << c.id;
    }
}

TEST(TopologyChange, DisconnectThenReconnectIsIdentity) {
    const auto& base = ieee14();
    const auto& br = base.branches().front();
    const auto cut = apply_topology_change(base, {br.from, br.to}, {br.from, br.to, br.impedance, br.charging});
    EXPECT_LT((build_admittance(cut) - build_admittance(base)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(TopologyChange, RejectsIslanding) {
    // bus 8 hangs off 7-8 only
    EXPECT_THROW(apply_topology_change(ieee14(), {7, 8}, {1, 2, std::nullopt, 0.0}), Error);
}

TEST(Measurements, FlatLosslessNetworkIsQuiet) {
    const auto t = gridad::testing::three_bus_ring();
    const auto plan = default_plan(t);
    const auto h = evaluate_measurements(StateVector::flat(3), t, plan);
    for (int i = 0; i < plan.size(); ++i) {
        if (plan.items[i].type == MeasurementType::V)
            EXPECT_DOUBLE_EQ(h(i), 1.0);
        else
            EXPECT_NEAR(h(i), 0.0, 1e-12) << plan.label(i, t);
    }
}

TEST(Measurements, TwoBusLineFlowClosedForm) {
    const auto t = two_bus(0.1);
    MeasurementPlan plan;
    plan.items.push_back({MeasurementType::Pflow, 0, 0, BranchEnd::From, 0.01});
    StateVector s = StateVector::flat(2);
    s.angle(1) = -0.1;
    const auto h = evaluate_measurements(s, t, plan);
    EXPECT_NEAR(h(0), 10.0 * std::sin(0.1), 1e-12);
    EXPECT_NEAR(h(0), 0.9983, 1e-4);
}

TEST(Measurements, ReproducesPowerFlowInjections) {
    const auto& t = ieee14();
    const auto pf = solve_power_flow(t, OperatingPoint::nominal(t));
    const auto plan = default_plan(t);
    const auto h = evaluate_measurements(pf.state, t, plan);
    for (int b = 0; b < 14; ++b) {
        EXPECT_NEAR(h(*plan.find_nodal(MeasurementType::Pinj, b)), pf.p_injection(b), 1e-6);
        EXPECT_NEAR(h(*plan.find_nodal(MeasurementType::Qinj, b)), pf.q_injection(b), 1e-6);
        EXPECT_NEAR(h(*plan.find_nodal(MeasurementType::V, b)), pf.state.magnitude(b), 1e-12);
    }
}

TEST(Jacobian, VoltageRowsAreUnitVectors) {
    const auto& t = ieee14();
    const MeasurementModel model(t, default_plan(t));
    const auto x = random_state(model.layout(), 3);
    const auto H = model.jacobian(x);
    for (int b = 0; b < 14; ++b) {
        const int row = *model.plan().find_nodal(MeasurementType::V, b);
        Eigen::RowVectorXd expect = Eigen::RowVectorXd::Zero(model.states());
        expect(model.layout().magnitude_col(b)) = 1.0;
        EXPECT_EQ(H.row(row), expect);
    }
}

TEST(Jacobian, MatchesCentralDifferences) {
    for (int id = 0; id < kTopologyCount; ++id) {
        const auto t = catalog_topology(id);
        const MeasurementModel model(t, default_plan(t));
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            const auto x = random_state(model.layout(), seed + 10 * id);
            const auto H = model.jacobian(x);
            const double step = 1e-6;
            double worst = 0.0;
            for (int j = 0; j < model.states(); ++j) {
                Eigen::VectorXd xp = x, xm = x;
                xp(j) += step;
                xm(j) -= step;
                const Eigen::VectorXd fd = (model.evaluate(xp) - model.evaluate(xm)) / (2 * step);
                worst = std::max(worst, (fd - H.col(j)).cwiseAbs().maxCoeff());
            }
            EXPECT_LT(worst, 1e-5) << "topology " << id << " seed " << seed;
        }
    }
}

TEST(Jacobian, FlatStateAngleDerivativeIsMinusB) {
    const auto& t = ieee14();
    const MeasurementModel model(t, default_plan(t));
    const auto H = model.jacobian(StateVector::flat(14).pack(model.layout()));
    const auto& y = model.admittance();
    for (int k = 0; k < 14; ++k) {
        const int row = *model.plan().find_nodal(MeasurementType::Pinj, k);
        for (int j = 0; j < 14; ++j) {
            const auto col = model.layout().angle_col(j);
            if (j == k || !col) continue;
            EXPECT_NEAR(H(row, *col), -y(k, j).imag(), 1e-12);
        }
    }
}

TEST(StateLayout, NamesRoundTrip) {
    const StateLayout layout(14, 0);
    EXPECT_EQ(layout.dim(), 27);
    for (int c = 0; c < layout.dim(); ++c) EXPECT_EQ(layout.parse(layout.name(c)), c);
    EXPECT_EQ(layout.parse("V14"), layout.magnitude_col(13));
}

TEST(Topology, JsonRoundTrip) {
    for (int id = 0; id < kTopologyCount; ++id) {
        const auto t = catalog_topology(id);
        EXPECT_EQ(topology_from_json(topology_to_json(t)), t);
    }
}

TEST(Topology, ResolveForms) {
    int id = -5;
    resolve_topology(nlohmann::json(3), &id);
    EXPECT_EQ(id, 3);
    resolve_topology(nlohmann::json("base"), &id);
    EXPECT_EQ(id, 0);
    EXPECT_THROW(resolve_topology(nlohmann::json(9), &id), Error);
}
