#include "gridad/ekf.hpp"

#include <cmath>

#include "gridad/error.hpp"

namespace gridad {

HoltState HoltState::start(const HoltParams& params, const Eigen::VectorXd& x0) {
    return {params, x0, Eigen::VectorXd::Zero(x0.size())};
}

HoltCoefficients holt_coefficients(const HoltState& holt, const Eigen::VectorXd& prev_estimate,
                                   const Eigen::VectorXd& prev_prediction) {
    const double a = holt.params.alpha, b = holt.params.beta;
    const auto n = prev_estimate.size();
    HoltCoefficients out;
    out.next.params = holt.params;
    out.next.level = a * prev_estimate + (1.0 - a) * prev_prediction;
    out.next.trend = b * (out.next.level - holt.level) + (1.0 - b) * holt.trend;
    out.transition = Eigen::MatrixXd::Identity(n, n) * (a * (1.0 + b));
    out.offset = (1.0 + b) * (1.0 - a) * prev_prediction - b * holt.level + (1.0 - b) * holt.trend;
    return out;
}

Prediction predict_state(const EkfBelief& belief, const Eigen::MatrixXd& transition,
                         const Eigen::VectorXd& offset) {
    return {transition * belief.estimate + offset,
            transition * belief.covariance * transition.transpose() + belief.process_noise};
}

EkfBelief filter_update(const EkfBelief& prior, const Prediction& prediction,
                        const Eigen::VectorXd& z, const MeasurementModel& model, FaseStep& step) {
    const Eigen::MatrixXd h = model.jacobian(prediction.state);
    step.prediction = prediction;
    step.innovation = z - model.evaluate(prediction.state);
    const Eigen::MatrixXd ph = prediction.covariance * h.transpose();
    step.innovation_covariance = h * ph;
    step.innovation_covariance.diagonal() += model.variances();

    Eigen::LDLT<Eigen::MatrixXd> ldlt(step.innovation_covariance);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() * kMaxInnovationCondition > 1.0))
        throw NumericalError("innovation covariance is ill-conditioned");
    // K = P~ H^T S^-1, computed as (S^-1 H P~)^T since S and P~ are symmetric.
    step.gain = ldlt.solve(ph.transpose()).transpose();
    step.normalized_innovations = normalized_innovations(step);

    EkfBelief next;
    next.process_noise = prior.process_noise;
    next.estimate = prediction.state + step.gain * step.innovation;
    next.covariance = prediction.covariance - step.gain * step.innovation_covariance * step.gain.transpose();
    next.covariance = 0.5 * (next.covariance + next.covariance.transpose()).eval();
    return next;
}

Eigen::VectorXd normalized_innovations(const FaseStep& step) {
    return step.innovation.cwiseQuotient(step.innovation_covariance.diagonal().cwiseSqrt());
}

ForecastingEstimator::ForecastingEstimator(const MeasurementModel& model, FaseOptions options)
    : model_(&model), options_(options) {}

void ForecastingEstimator::initialize(const Eigen::VectorXd& x0) {
    const auto n = x0.size();
    belief_.estimate = x0;
    belief_.covariance = Eigen::MatrixXd::Identity(n, n) * options_.initial_covariance;
    belief_.process_noise = Eigen::MatrixXd::Identity(n, n) * options_.process_noise;
    holt_ = HoltState::start(options_.holt, x0);
    last_prediction_ = x0;
    initialized_ = true;
}

const FaseStep& ForecastingEstimator::step(const Eigen::VectorXd& z) {
    if (!initialized_) throw UsageError("forecasting estimator used before initialization");
    auto coeffs = holt_coefficients(holt_, belief_.estimate, last_prediction_);
    const Prediction prediction = predict_state(belief_, coeffs.transition, coeffs.offset);
    belief_ = filter_update(belief_, prediction, z, *model_, last_);
    holt_ = std::move(coeffs.next);
    last_prediction_ = prediction.state;
    return last_;
}

}  // namespace gridad
