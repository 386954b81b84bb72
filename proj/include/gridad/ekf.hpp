#pragma once

#include <optional>

#include <Eigen/Dense>

#include "gridad/measurement.hpp"

namespace gridad {

struct HoltParams {
    double alpha = 0.8;
    double beta = 0.5;
};

/// Holt two-parameter smoothing state: smoothed level and trend per state.
struct HoltState {
    HoltParams params;
    Eigen::VectorXd level;
    Eigen::VectorXd trend;

    static HoltState start(const HoltParams& params, const Eigen::VectorXd& x0);
};

/// Linear transition x~ = A x^ + g for the next step.
struct HoltCoefficients {
    Eigen::MatrixXd transition;  // A
    Eigen::VectorXd offset;      // g
    HoltState next;
};

/// One Holt update from the previous estimate and previous prediction:
///   a_t = alpha x^ + (1 - alpha) x~,  b_t = beta (a_t - a_{t-1}) + (1 - beta) b_{t-1}
///   A = alpha (1 + beta) I,  g = (1 + beta)(1 - alpha) x~ - beta a_{t-1} + (1 - beta) b_{t-1}
/// so that A x^ + g = a_t + b_t.
HoltCoefficients holt_coefficients(const HoltState& holt, const Eigen::VectorXd& prev_estimate,
                                   const Eigen::VectorXd& prev_prediction);

struct EkfBelief {
    Eigen::VectorXd estimate;    // x^
    Eigen::MatrixXd covariance;  // P^
    Eigen::MatrixXd process_noise;  // Q
};

struct Prediction {
    Eigen::VectorXd state;       // x~
    Eigen::MatrixXd covariance;  // P~
};

/// x~ = A x^ + g,  P~ = A P^ A^T + Q.
Prediction predict_state(const EkfBelief& belief, const Eigen::MatrixXd& transition,
                         const Eigen::VectorXd& offset);

struct FaseStep {
    Prediction prediction;
    Eigen::VectorXd innovation;             // nu = z - h(x~)
    Eigen::MatrixXd innovation_covariance;  // S
    Eigen::MatrixXd gain;                   // K
    Eigen::VectorXd normalized_innovations; // nu_i / sqrt(S_ii)
};

/// Condition number of S above which the filter update is refused.
inline constexpr double kMaxInnovationCondition = 1e12;

/// EKF measurement update. Returns the new belief (Q carried over) and fills
/// `step`. Throws NumericalError when S is too ill-conditioned.
EkfBelief filter_update(const EkfBelief& prior, const Prediction& prediction,
                        const Eigen::VectorXd& z, const MeasurementModel& model, FaseStep& step);

Eigen::VectorXd normalized_innovations(const FaseStep& step);

struct FaseOptions {
    HoltParams holt;
    double process_noise = 1e-6;       // Q = q I
    double initial_covariance = 1e-2;  // P^0 = p I
};

/// Sequential forecasting-aided estimator: Holt transition plus EKF update.
/// Owns the running belief; one instance per scenario.
class ForecastingEstimator {
public:
    ForecastingEstimator(const MeasurementModel& model, FaseOptions options = {});

    /// Seeds the belief with an initial estimate (typically a one-shot WLS).
    void initialize(const Eigen::VectorXd& x0);
    bool initialized() const { return initialized_; }

    /// Predict from the running belief, then filter with `z`.
    const FaseStep& step(const Eigen::VectorXd& z);

    const EkfBelief& belief() const { return belief_; }
    const HoltState& holt() const { return holt_; }
    const FaseStep& last_step() const { return last_; }

private:
    const MeasurementModel* model_;
    FaseOptions options_;
    EkfBelief belief_;
    HoltState holt_;
    Eigen::VectorXd last_prediction_;
    FaseStep last_;
    bool initialized_ = false;
};

}  // namespace gridad
