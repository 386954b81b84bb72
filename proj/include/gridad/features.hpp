#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridad/detection.hpp"
#include "gridad/measurement.hpp"

namespace gridad {

inline constexpr int kFeaturesPerBus = 16;
inline constexpr int kSlackFeatures = 6;

/// n_x = 16 N - 10.
constexpr int feature_count(int buses) { return kFeaturesPerBus * buses - (kFeaturesPerBus - kSlackFeatures); }

/// Bus-major feature names, e.g. "b14_zV", "b14_nuP", "b14_adiTheta". Depends
/// only on the bus count and the slack position, never on the branch set.
std::vector<std::string> feature_names(const StateLayout& layout);

/// Bus-only features of one detection step. Per non-slack bus: measured V,
/// P, Q; their normalized innovations; EKF estimate of V, theta, P, Q;
/// prediction of V, theta, P, Q; ADI of V and theta. The slack bus keeps the
/// first six. Throws DataError if the filter did not run on this step or the
/// plan lacks a nodal meter.
Eigen::VectorXd extract_bus_features(const StepReport& step, const Eigen::VectorXd& z,
                                     const MeasurementModel& model);

}  // namespace gridad
