#pragma once

#include <optional>

#include <Eigen/Dense>

#include "gridad/measurement.hpp"

namespace gridad {

struct WlsOptions {
    double tolerance = 1e-6;  // on ||dx||_inf
    int max_iterations = 20;
};

struct WlsSolution {
    Eigen::VectorXd estimate;
    Eigen::VectorXd residuals;  // z - h(estimate)
    double objective = 0.0;     // sum r_i^2 / sigma_i^2
    int iterations = 0;
    Eigen::MatrixXd jacobian;   // H at the estimate
    Eigen::VectorXd variances;  // diag(R)

    int measurements() const { return static_cast<int>(residuals.size()); }
    int states() const { return static_cast<int>(estimate.size()); }
    int degrees_of_freedom() const { return measurements() - states(); }
};

/// Gauss-Newton weighted least squares. Starts from `init` (flat start when
/// empty). Throws ObservabilityError on a singular gain matrix and
/// DivergenceError (carrying the last iterate) at the iteration cap.
WlsSolution estimate_wls(const Eigen::VectorXd& z, const MeasurementModel& model,
                         const std::optional<Eigen::VectorXd>& init = std::nullopt,
                         const WlsOptions& options = {});

/// Omega = R - H (H^T R^-1 H)^-1 H^T at the solution.
Eigen::MatrixXd residual_covariance(const WlsSolution& solution);

/// Inverse chi-square CDF.
double chi_square_threshold(int dof, double p);

struct ChiSquareResult {
    bool flag = false;
    double objective = 0.0;
    double threshold = 0.0;
};

ChiSquareResult chi_square_test(const WlsSolution& solution, double p);

struct LnrResult {
    int index = -1;
    double value = 0.0;
    bool suspect = false;
};

/// Largest normalized residual. Channels with Omega_ii below `critical_floor`
/// are skipped; throws NumericalError if every channel is skipped.
LnrResult largest_normalized_residual(const WlsSolution& solution, double tau = 3.0,
                                      double critical_floor = 1e-10);
LnrResult largest_normalized_residual(const Eigen::VectorXd& residuals,
                                      const Eigen::MatrixXd& omega, double tau = 3.0,
                                      double critical_floor = 1e-10);

}  // namespace gridad
