#include "gridad/wls.hpp"

#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "gridad/error.hpp"

namespace gridad {

namespace {

// Relative pivot floor of the gain-matrix LDL^T below which the plan is
// treated as unobservable.
constexpr double kSingularGain = 1e-12;

Eigen::LDLT<Eigen::MatrixXd> factor_gain(const Eigen::MatrixXd& h, const Eigen::VectorXd& weights) {
    const Eigen::MatrixXd gain = h.transpose() * weights.asDiagonal() * h;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gain);
    const auto d = ldlt.vectorD();
    const double scale = gain.diagonal().cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(d.minCoeff() > kSingularGain * scale))
        throw ObservabilityError("gain matrix is singular: the plan does not observe the state");
    return ldlt;
}

}  // namespace

WlsSolution estimate_wls(const Eigen::VectorXd& z, const MeasurementModel& model,
                         const std::optional<Eigen::VectorXd>& init, const WlsOptions& options) {
    if (z.size() != model.measurements())
        throw DataError("measurement vector has " + std::to_string(z.size()) + " entries, plan has " +
                        std::to_string(model.measurements()));
    if (model.measurements() < model.states())
        throw ObservabilityError("fewer measurements than states");

    const Eigen::VectorXd weights = model.variances().cwiseInverse();
    Eigen::VectorXd x = init.value_or(StateVector::flat(model.layout().buses()).pack(model.layout()));

    WlsSolution sol;
    sol.variances = model.variances();
    for (int it = 1;; ++it) {
        const Eigen::VectorXd r = z - model.evaluate(x);
        const Eigen::MatrixXd h = model.jacobian(x);
        const auto ldlt = factor_gain(h, weights);
        const Eigen::VectorXd dx = ldlt.solve(h.transpose() * weights.cwiseProduct(r));
        x += dx;
        const double step = dx.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(step)) throw NumericalError("WLS iteration produced non-finite values");
        if (step < options.tolerance) {
            sol.iterations = it;
            break;
        }
        if (it >= options.max_iterations) {
            throw DivergenceError("WLS did not converge in " + std::to_string(options.max_iterations) +
                                      " iterations (last step " + std::to_string(step) + ")",
                                  step, std::vector<double>(x.data(), x.data() + x.size()));
        }
    }
    sol.estimate = x;
    sol.residuals = z - model.evaluate(x);
    sol.jacobian = model.jacobian(x);
    sol.objective = sol.residuals.cwiseAbs2().cwiseProduct(weights).sum();
    return sol;
}

Eigen::MatrixXd residual_covariance(const WlsSolution& solution) {
    const Eigen::VectorXd weights = solution.variances.cwiseInverse();
    const auto ldlt = factor_gain(solution.jacobian, weights);
    const Eigen::MatrixXd ht = solution.jacobian.transpose();
    Eigen::MatrixXd omega = -(solution.jacobian * ldlt.solve(ht));
    omega.diagonal() += solution.variances;
    return omega;
}

double chi_square_threshold(int dof, double p) {
    if (dof < 1) throw UsageError("chi-square degrees of freedom must be >= 1");
    if (!(p > 0.0 && p < 1.0)) throw UsageError("chi-square probability must lie in (0, 1)");
    return boost::math::quantile(boost::math::chi_squared_distribution<double>(dof), p);
}

ChiSquareResult chi_square_test(const WlsSolution& solution, double p) {
    ChiSquareResult out;
    out.objective = solution.objective;
    out.threshold = chi_square_threshold(solution.degrees_of_freedom(), p);
    out.flag = out.objective >= out.threshold;
    return out;
}

LnrResult largest_normalized_residual(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& omega,
                                      double tau, double critical_floor) {
    LnrResult out;
    for (Eigen::Index i = 0; i < residuals.size(); ++i) {
        const double var = omega(i, i);
        if (var < critical_floor) continue;
        const double value = std::abs(residuals(i)) / std::sqrt(var);
        if (out.index < 0 || value > out.value) {
            out.index = static_cast<int>(i);
            out.value = value;
        }
    }
    if (out.index < 0)
        throw NumericalError("every measurement is critical; bad data cannot be identified");
    out.suspect = out.value > tau;
    return out;
}

LnrResult largest_normalized_residual(const WlsSolution& solution, double tau,
                                      double critical_floor) {
    return largest_normalized_residual(solution.residuals, residual_covariance(solution), tau,
                                       critical_floor);
}

}  // namespace gridad
