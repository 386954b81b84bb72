#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "gridad/error.hpp"
#include "gridad/power_flow.hpp"
#include "gridad/scenario.hpp"
#include "gridad/wls.hpp"
#include "helpers.hpp"

using namespace gridad;

TEST(PowerFlow, ZeroLoadIsFlat) {
    const auto t = gridad::testing::three_bus_ring();
    OperatingPoint op = OperatingPoint::nominal(t);
    op.p_load.setZero();
    op.q_load.setZero();
    op.p_gen.setZero();
    op.v_set.setOnes();
    const auto pf = solve_power_flow(t, op);
    EXPECT_LT((pf.state.magnitude.array() - 1.0).abs().maxCoeff(), 1e-10);
    EXPECT_LT(pf.state.angle.cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PowerFlow, SatisfiesSpecifiedInjections) {
    const auto& t = ieee14();
    const auto op = OperatingPoint::nominal(t);
    const auto pf = solve_power_flow(t, op);
    const auto plan = default_plan(t);
    const auto h = evaluate_measurements(pf.state, t, plan);
    for (int b = 0; b < 14; ++b) {
        if (b == t.slack()) continue;
        EXPECT_NEAR(h(*plan.find_nodal(MeasurementType::Pinj, b)), op.p_gen(b) - op.p_load(b), 1e-6);
        if (t.buses()[b].kind == BusKind::Load)
            EXPECT_NEAR(h(*plan.find_nodal(MeasurementType::Qinj, b)), -op.q_load(b), 1e-6);
        else
            EXPECT_NEAR(pf.state.magnitude(b), op.v_set(b), 1e-10);
    }
}

TEST(PowerFlow, LighterLoadLowersSlackInjection) {
    const auto& t = ieee14();
    auto op = OperatingPoint::nominal(t);
    double previous = solve_power_flow(t, op).slack_p(t);
    for (int k = 0; k < 5; ++k) {
        op.p_load *= 0.99;
        op.q_load *= 0.99;
        const double now = solve_power_flow(t, op).slack_p(t);
        EXPECT_LT(now, previous);
        previous = now;
    }
}

TEST(PowerFlow, DivergesOnImpossibleLoad) {
    const auto& t = ieee14();
    auto op = OperatingPoint::nominal(t);
    op.p_load *= 50.0;
    EXPECT_THROW(solve_power_flow(t, op), DivergenceError);
}

TEST(Noise, ZeroSigmaIsIdentity) {
    const auto& t = ieee14();
    const auto plan = default_plan(t, 0.0);
    const Eigen::VectorXd clean = Eigen::VectorXd::LinSpaced(plan.size(), -1, 1);
    EXPECT_EQ(add_measurement_noise(clean, plan, 5u), clean);
}

TEST(Noise, MomentsAndReproducibility) {
    MeasurementPlan plan;
    plan.items.push_back({MeasurementType::V, 0, -1, BranchEnd::From, 0.01});
    Rng rng(11);
    const int n = 100000;
    double sum = 0, sq = 0;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
    for (int i = 0; i < n; ++i) {
        const double e = add_measurement_noise(zero, plan, rng)(0);
        sum += e;
        sq += e * e;
    }
    const double mean = sum / n, sd = std::sqrt(sq / n - mean * mean);
    EXPECT_LT(std::abs(mean), 3 * 0.01 / std::sqrt(double(n)));
    EXPECT_NEAR(sd, 0.01, 0.02 * 0.01);

    const auto full = default_plan(ieee14());
    const Eigen::VectorXd c = Eigen::VectorXd::Ones(full.size());
    EXPECT_EQ(add_measurement_noise(c, full, 77u), add_measurement_noise(c, full, 77u));
}

TEST(BadData, ScalesTargetedEntry) {
    const auto& t = ieee14();
    const auto plan = default_plan(t);
    const int row = *plan.find_nodal(MeasurementType::Pinj, 13);
    const Eigen::VectorXd clean = Eigen::VectorXd::Constant(plan.size(), -0.149);
    AnomalySpec spec{AnomalyKind::BadData, 5, 10, {row}, {0.05}, false};
    const auto z = inject_bad_data(clean, clean, spec);
    EXPECT_DOUBLE_EQ(z(row), -0.149 * 1.05);
    for (int i = 0; i < plan.size(); ++i)
        if (i != row) {
            EXPECT_EQ(z(i), clean(i));
        }
    spec.targets.clear();
    spec.magnitudes.clear();
    EXPECT_EQ(inject_bad_data(clean, clean, spec), clean);
}

TEST(BadData, LargeErrorTripsChiSquare) {
    const auto& t = ieee14();
    const MeasurementModel model(t, default_plan(t));
    const auto pf = solve_power_flow(t, OperatingPoint::nominal(t));
    const Eigen::VectorXd clean = model.evaluate(pf.state.pack(model.layout()));
    const Eigen::VectorXd noisy = add_measurement_noise(clean, model.plan(), 3u);
    const int row = *model.plan().find_nodal(MeasurementType::Pinj, 1);
    const AnomalySpec spec{AnomalyKind::BadData, 0, std::nullopt, {row}, {0.5}, false};
    EXPECT_FALSE(chi_square_test(estimate_wls(noisy, model), 0.99).flag);
    EXPECT_TRUE(chi_square_test(estimate_wls(inject_bad_data(noisy, clean, spec), model), 0.99).flag);
}

TEST(SuddenLoadChange, ShedsAndValidates) {
    const auto& t = ieee14();
    const auto op = OperatingPoint::nominal(t);
    const AnomalySpec spec{AnomalyKind::SuddenLoadChange, 6, 46, {13}, {0.2}, false};
    const auto shed = apply_sudden_load_change(op, spec);
    EXPECT_DOUBLE_EQ(shed.p_load(13), 0.8 * op.p_load(13));
    EXPECT_DOUBLE_EQ(shed.q_load(13), 0.8 * op.q_load(13));
    for (int b = 0; b < 13; ++b) EXPECT_EQ(shed.p_load(b), op.p_load(b));

    const AnomalySpec empty{AnomalyKind::SuddenLoadChange, 6, 46, {13}, {0.0}, false};
    EXPECT_THROW(validate_specs({empty}, t, default_plan(t), 100, false), UsageError);
}

TEST(Trajectory, SheddingWindowFollowsSchedule) {
    const auto& t = ieee14();
    const auto profile = LoadProfile::ramp(60, 14);
    const AnomalySpec spec{AnomalyKind::SuddenLoadChange, 6, 46, {13}, {0.2}, false};
    const auto plain = generate_trajectory(t, profile, {}, 4);
    const auto shed = generate_trajectory(t, profile, {spec}, 4);
    const int row = *plain.plan.find_nodal(MeasurementType::Pinj, 13);
    for (int k = 0; k < 60; ++k) {
        const double ratio = shed.steps[k].z_clean(row) / plain.steps[k].z_clean(row);
        const bool active = k >= 6 && k < 46;
        // two independent power-flow solves, each converged to 1e-8 mismatch
        EXPECT_NEAR(ratio, active ? 0.8 : 1.0, 1e-6) << "t=" << k;
        EXPECT_EQ(shed.steps[k].label.normal(), !active);
    }
}

TEST(Trajectory, EmptySpecsAreNormalAndSeeded) {
    const auto& t = ieee14();
    const auto a = generate_trajectory(t, LoadProfile::ramp(20, 14), {}, 9);
    const auto b = generate_trajectory(t, LoadProfile::ramp(20, 14), {}, 9);
    const auto c = generate_trajectory(t, LoadProfile::ramp(20, 14), {}, 10);
    for (int k = 0; k < 20; ++k) {
        EXPECT_TRUE(a.steps[k].label.normal());
        EXPECT_EQ(a.steps[k].z, b.steps[k].z);
        EXPECT_EQ(a.steps[k].x_true, b.steps[k].x_true);
        EXPECT_GT((a.steps[k].z - a.steps[k].z_clean).norm(), 0.0);
    }
    EXPECT_NE(a.steps[3].z, c.steps[3].z);
}

TEST(Trajectory, ConcurrentAnomaliesNeedOptIn) {
    const auto& t = ieee14();
    const StateLayout layout(t);
    const std::vector<AnomalySpec> specs{{AnomalyKind::SuddenLoadChange, 6, 46, {13}, {0.2}, false},
                                         {AnomalyKind::FalseDataInjection, 20, std::nullopt,
                                          {layout.magnitude_col(13)}, {0.05}, false}};
    EXPECT_THROW(generate_trajectory(t, LoadProfile::ramp(60, 14), specs, 1), UsageError);
    SimulationOptions o;
    o.allow_concurrent = true;
    EXPECT_NO_THROW(generate_trajectory(t, LoadProfile::ramp(60, 14), specs, 1, o));
}

class StealthAttackTest : public ::testing::Test {
protected:
    NetworkTopology topology = ieee14();
    MeasurementModel model{topology, default_plan(topology)};
    Eigen::VectorXd z;
    WlsSolution clean;

    void SetUp() override {
        const auto pf = solve_power_flow(topology, OperatingPoint::nominal(topology));
        z = add_measurement_noise(model.evaluate(pf.state.pack(model.layout())), model.plan(), 21u);
        clean = estimate_wls(z, model);
    }
};

TEST_F(StealthAttackTest, ZeroOffsetIsZeroAttack) {
    const auto a = build_stealth_attack(clean.estimate, Eigen::VectorXd::Zero(model.states()), model);
    EXPECT_EQ(a.attack.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(apply_attack(z, a.attack), z);
}

TEST_F(StealthAttackTest, ResidualIsInvariant) {
    const StateLayout& L = model.layout();
    Eigen::VectorXd single = Eigen::VectorXd::Zero(model.states());
    single(L.magnitude_col(13)) = 0.05;
    Eigen::VectorXd multi = Eigen::VectorXd::Zero(model.states());
    multi(*L.angle_col(9)) = 0.03;
    multi(*L.angle_col(12)) = -0.02;
    for (const auto& c : {single, multi}) {
        const auto a = build_stealth_attack(clean.estimate, c, model);
        const Eigen::VectorXd za = apply_attack(z, a.attack);
        // by construction the attacked residual at x^ + c is the clean one
        const Eigen::VectorXd ra = za - model.evaluate(a.attacked_state);
        EXPECT_NEAR((ra.array().square() / model.plan().variances().array()).sum(), clean.objective, 1e-8);
        const auto attacked = estimate_wls(za, model, clean.estimate);
        EXPECT_NEAR(attacked.objective, clean.objective, 1e-8);
        EXPECT_LT((attacked.estimate - a.attacked_state).cwiseAbs().maxCoeff(), 1e-6);
        EXPECT_FALSE(chi_square_test(attacked, 0.99).flag);
    }
}

TEST_F(StealthAttackTest, ArbitrarySpikeIsCaught) {
    Eigen::VectorXd spike = Eigen::VectorXd::Zero(model.measurements());
    spike(*model.plan().find_nodal(MeasurementType::Qinj, 4)) = 0.3;
    EXPECT_TRUE(chi_square_test(estimate_wls(apply_attack(z, spike), model), 0.99).flag);
}

TEST_F(StealthAttackTest, TooManyBusesRejected) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(model.states());
    for (int b = 1; b <= kMaxAttackedBuses + 1; ++b) c(model.layout().magnitude_col(b)) = 0.01;
    EXPECT_THROW(build_stealth_attack(clean.estimate, c, model), UsageError);
}

TEST(ScenarioConfig, SeedIsRequiredAndSpecsRoundTrip) {
    nlohmann::json doc = {{"topology", 0}, {"anomalies", nlohmann::json::array()}};
    EXPECT_THROW(ScenarioConfig::from_json(doc), UsageError);
    const auto& t = ieee14();
    const auto plan = default_plan(t);
    const AnomalySpec bd{AnomalyKind::BadData, 5, 10, {*plan.find_nodal(MeasurementType::Pinj, 13)}, {0.05}, false};
    const auto back = spec_from_json(spec_to_json(bd, t, plan), t, plan);
    EXPECT_EQ(back.targets, bd.targets);
    EXPECT_EQ(back.magnitudes, bd.magnitudes);
    EXPECT_EQ(back.clear, bd.clear);
}
