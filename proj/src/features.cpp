#include "gridad/features.hpp"

#include "gridad/error.hpp"

namespace gridad {

namespace {

const char* const kBusFeatureNames[kFeaturesPerBus] = {
    "zV",   "zP",     "zQ",   "nuV",   "nuP",     "nuQ",   "estV",   "estTheta",
    "estP", "estQ",   "predV", "predTheta", "predP", "predQ", "adiV", "adiTheta"};

}  // namespace

std::vector<std::string> feature_names(const StateLayout& layout) {
    std::vector<std::string> names;
    names.reserve(feature_count(layout.buses()));
    for (int b = 0; b < layout.buses(); ++b) {
        const int count = b == layout.slack() ? kSlackFeatures : kFeaturesPerBus;
        for (int k = 0; k < count; ++k)
            names.push_back("b" + std::to_string(b + 1) + "_" + kBusFeatureNames[k]);
    }
    return names;
}

Eigen::VectorXd extract_bus_features(const StepReport& step, const Eigen::VectorXd& z,
                                     const MeasurementModel& model) {
    if (!step.ekf_ran)
        throw DataError("step " + std::to_string(step.t) + ": no filter output to extract features from");
    const auto& layout = model.layout();
    const auto& plan = model.plan();
    const int buses = layout.buses();
    if (z.size() != plan.size() || step.normalized_innovations.size() != plan.size())
        throw DataError("feature extraction: measurement vector does not match the plan");

    const auto est = StateVector::unpack(step.ekf_estimate, layout);
    const auto pred = StateVector::unpack(step.prediction, layout);
    Eigen::VectorXd p_est, q_est, p_pred, q_pred;
    model.injections(est, p_est, q_est);
    model.injections(pred, p_pred, q_pred);

    Eigen::VectorXd out(feature_count(buses));
    int k = 0;
    const MeasurementType nodal[3] = {MeasurementType::V, MeasurementType::Pinj, MeasurementType::Qinj};
    for (int b = 0; b < buses; ++b) {
        int rows[3];
        for (int j = 0; j < 3; ++j) {
            const auto row = plan.find_nodal(nodal[j], b);
            if (!row)
                throw DataError("feature extraction: plan has no " + to_string(nodal[j]) +
                                " meter at bus " + std::to_string(b + 1));
            rows[j] = *row;
        }
        for (int j = 0; j < 3; ++j) out[k++] = z[rows[j]];
        for (int j = 0; j < 3; ++j) out[k++] = step.normalized_innovations[rows[j]];
        if (b == layout.slack()) continue;

        const int vc = layout.magnitude_col(b);
        const int ac = *layout.angle_col(b);
        out[k++] = est.magnitude[b];
        out[k++] = est.angle[b];
        out[k++] = p_est[b];
        out[k++] = q_est[b];
        out[k++] = pred.magnitude[b];
        out[k++] = pred.angle[b];
        out[k++] = p_pred[b];
        out[k++] = q_pred[b];
        out[k++] = step.adi[vc];
        out[k++] = step.adi[ac];
    }
    return out;
}

}  // namespace gridad
