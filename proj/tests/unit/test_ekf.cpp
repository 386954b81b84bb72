#include <cmath>

#include <gtest/gtest.h>

#include "gridad/ekf.hpp"
#include "gridad/error.hpp"
#include "gridad/scenario.hpp"
#include "gridad/wls.hpp"
#include "helpers.hpp"

using namespace gridad;

namespace {

// Two buses with only V2 metered, so h(x) = x on that one state.
struct ScalarModel {
    NetworkTopology topology = gridad::testing::two_bus(0.1);
    MeasurementPlan plan;
    explicit ScalarModel(double sigma) {
        plan.items = {{MeasurementType::V, 1, -1, BranchEnd::From, sigma}};
    }
};

}  // namespace

TEST(Holt, PersistenceLimit) {
    const Eigen::VectorXd x0 = Eigen::VectorXd::LinSpaced(5, 0.9, 1.1);
    const auto holt = HoltState::start({1.0, 0.0}, x0);
    const auto c = holt_coefficients(holt, x0, x0);
    EXPECT_EQ(c.transition, Eigen::MatrixXd::Identity(5, 5));
    EXPECT_EQ(c.offset, Eigen::VectorXd::Zero(5));
}

TEST(Holt, ConstantSequenceIsFixedPoint) {
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(7, -0.2, 1.05);
    auto holt = HoltState::start({0.8, 0.5}, x);
    Eigen::VectorXd prediction = x;
    for (int k = 0; k < 50; ++k) {
        auto c = holt_coefficients(holt, x, prediction);
        prediction = c.transition * x + c.offset;
        holt = c.next;
    }
    EXPECT_LT((prediction - x).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Holt, RampIsCapturedAfterBurnIn) {
    const Eigen::VectorXd slope = Eigen::VectorXd::LinSpaced(4, -0.01, 0.02);
    const Eigen::VectorXd base = Eigen::VectorXd::Ones(4);
    auto holt = HoltState::start({0.8, 0.5}, base);
    Eigen::VectorXd prediction = base;
    double error = 1.0;
    for (int k = 0; k < 80; ++k) {
        const Eigen::VectorXd x = base + k * slope;
        error = (prediction - x).cwiseAbs().maxCoeff();
        auto c = holt_coefficients(holt, x, prediction);
        prediction = c.transition * x + c.offset;
        holt = c.next;
    }
    EXPECT_LT(error, 1e-9);
}

TEST(Predict, Identities) {
    EkfBelief b;
    b.estimate = Eigen::Vector3d(1.0, 0.5, -0.2);
    b.covariance = Eigen::Matrix3d::Identity() * 0.3;
    b.covariance(0, 1) = b.covariance(1, 0) = 0.1;
    b.process_noise = Eigen::Matrix3d::Zero();
    const auto same = predict_state(b, Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
    EXPECT_EQ(same.state, b.estimate);
    EXPECT_EQ(same.covariance, b.covariance);

    b.process_noise = Eigen::Matrix3d::Identity() * 0.25;
    Eigen::Matrix3d A = Eigen::Matrix3d::Identity() * 1.2;
    A(0, 2) = 0.3;
    const auto p = predict_state(b, A, Eigen::Vector3d::Zero());
    const Eigen::VectorXd expect = (A * b.covariance * A.transpose()).diagonal().array() + 0.25;
    EXPECT_LT((p.covariance.diagonal() - expect).cwiseAbs().maxCoeff(), 1e-15);

    EkfBelief s;
    s.estimate = Eigen::VectorXd::Constant(1, 1.0);
    s.covariance = Eigen::MatrixXd::Constant(1, 1, 1.0);
    s.process_noise = Eigen::MatrixXd::Constant(1, 1, 0.5);
    EXPECT_DOUBLE_EQ(predict_state(s, Eigen::MatrixXd::Constant(1, 1, 2.0), Eigen::VectorXd::Zero(1)).covariance(0, 0),
                     4.5);
}

TEST(FilterUpdate, ScalarKalmanAlgebra) {
    // Only the V2 column of H is nonzero, so the update acts on that state
    // alone and reduces to the scalar formulas.
    ScalarModel m(1.0);
    const MeasurementModel model(m.topology, m.plan);
    const StateLayout& L = model.layout();
    const int v2 = L.magnitude_col(1);
    Prediction pred;
    pred.state = Eigen::VectorXd::Zero(3);
    pred.state(L.magnitude_col(0)) = 1.0;
    pred.state(v2) = 1.0;
    pred.covariance = Eigen::MatrixXd::Identity(3, 3);
    EkfBelief prior{pred.state, pred.covariance, Eigen::MatrixXd::Zero(3, 3)};
    const double nu = 0.3;
    FaseStep step;
    const auto post = filter_update(prior, pred, Eigen::VectorXd::Constant(1, 1.0 + nu), model, step);
    EXPECT_NEAR(step.innovation_covariance(0, 0), 2.0, 1e-15);
    EXPECT_NEAR(step.gain(v2, 0), 0.5, 1e-15);
    EXPECT_NEAR(post.estimate(v2), 1.0 + 0.5 * nu, 1e-15);
    EXPECT_NEAR(post.covariance(v2, v2), 0.5, 1e-15);
    EXPECT_NEAR(step.normalized_innovations(0), nu / std::sqrt(2.0), 1e-15);
}

TEST(FilterUpdate, HugeMeasurementNoiseIgnoresData) {
    const auto& t = ieee14();
    const MeasurementModel model(t, default_plan(t, std::sqrt(1e9)));
    const auto trace = generate_trajectory(t, LoadProfile::ramp(2, 14), {}, 3);
    Prediction pred{trace.steps[0].x_true, Eigen::MatrixXd::Identity(27, 27) * 1e-2};
    EkfBelief prior{pred.state, pred.covariance, Eigen::MatrixXd::Zero(27, 27)};
    FaseStep step;
    const auto post = filter_update(prior, pred, trace.steps[1].z, model, step);
    EXPECT_LT((post.estimate - pred.state).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(NormalizedInnovations, ZeroInnovationGivesZeros) {
    FaseStep step;
    step.innovation = Eigen::VectorXd::Zero(4);
    step.innovation_covariance = Eigen::MatrixXd::Identity(4, 4) * 2.0;
    EXPECT_EQ(normalized_innovations(step), Eigen::VectorXd::Zero(4));
}

class RampTracking : public ::testing::Test {
protected:
    NetworkTopology topology = ieee14();
    ScenarioTrace trace = generate_trajectory(topology, LoadProfile::ramp(100, 14), {}, 12);
    MeasurementModel model{topology, trace.plan};
};

TEST_F(RampTracking, EstimateStaysNearTruth) {
    ForecastingEstimator fase(model);
    fase.initialize(estimate_wls(trace.steps[0].z, model).estimate);
    for (int k = 1; k < 100; ++k) {
        fase.step(trace.steps[k].z);
        if (k > 10) {
            EXPECT_LT((fase.belief().estimate - trace.steps[k].x_true).cwiseAbs().maxCoeff(), 3 * 0.01) << "t=" << k;
        }
    }
}

TEST_F(RampTracking, InnovationsAreRoughlyWhite) {
    ForecastingEstimator fase(model);
    fase.initialize(estimate_wls(trace.steps[0].z, model).estimate);
    const int m = model.measurements();
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(m), sq = Eigen::VectorXd::Zero(m);
    int n = 0;
    for (int k = 1; k < 100; ++k) {
        const auto& s = fase.step(trace.steps[k].z);
        if (k <= 10) continue;
        sum += s.normalized_innovations;
        sq += s.normalized_innovations.cwiseAbs2();
        ++n;
    }
    const Eigen::VectorXd var = (sq.array() / n - (sum.array() / n).square()).matrix();
    for (int i = 0; i < m; ++i) {
        EXPECT_GE(var(i), 0.5) << model.plan().label(i, topology);
        EXPECT_LE(var(i), 1.5) << model.plan().label(i, topology);
    }
}

TEST(Innovations, LoadSheddingSpikesAtOnset) {
    const auto& t = ieee14();
    const AnomalySpec slc{AnomalyKind::SuddenLoadChange, 30, std::nullopt, {13}, {0.2}, false};
    const auto trace = generate_trajectory(t, LoadProfile::ramp(40, 14), {slc}, 4);
    const MeasurementModel model(t, trace.plan);
    ForecastingEstimator fase(model);
    fase.initialize(estimate_wls(trace.steps[0].z, model).estimate);
    for (int k = 1; k < 30; ++k) fase.step(trace.steps[k].z);
    const auto& s = fase.step(trace.steps[30].z);
    const int row = *trace.plan.find_nodal(MeasurementType::Pinj, 13);
    EXPECT_GT(std::abs(s.normalized_innovations(row)), 3.0);
}

TEST(Fase, StepBeforeInitializeIsAnError) {
    const auto& t = ieee14();
    const MeasurementModel model(t, default_plan(t));
    ForecastingEstimator fase(model);
    EXPECT_THROW(fase.step(Eigen::VectorXd::Zero(model.measurements())), UsageError);
}
