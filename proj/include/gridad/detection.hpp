#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridad/ekf.hpp"
#include "gridad/scenario.hpp"
#include "gridad/wls.hpp"

namespace gridad {

struct DetectionConfig {
    double chi2_probability = 0.99;
    double gamma = 6.0;
    double lnr_tau = 3.0;
    FaseOptions fase;
    WlsOptions wls;
};

enum class Verdict { Normal, BadData, SlcOrFdia };

std::string to_string(Verdict v);  // "normal", "bad-data", "anomaly-SLC-or-FDIA"

struct StepReport {
    int t = 0;
    ChiSquareResult chi2;
    std::optional<LnrResult> lnr;
    bool ekf_ran = false;
    Eigen::VectorXd adi;
    double max_adi = 0.0;
    int adi_argmax = -1;
    Verdict verdict = Verdict::Normal;

    // Estimator outputs for the classification stage. EKF fields are empty
    // on steps where the filter did not run.
    Eigen::VectorXd wls_estimate;
    Eigen::VectorXd ekf_estimate;
    Eigen::VectorXd prediction;
    Eigen::VectorXd normalized_innovations;
};

struct DetectionReport {
    std::vector<StepReport> steps;

    std::vector<int> flagged_steps() const;  // verdict == SlcOrFdia
};

/// ADI_i = |x_wls_i - x_ekf_i| / sqrt(P_ii). Throws NumericalError when a
/// diagonal entry of P is not positive.
Eigen::VectorXd anomaly_detection_index(const Eigen::VectorXd& wls_estimate,
                                        const Eigen::VectorXd& ekf_estimate,
                                        const Eigen::MatrixXd& covariance);

/// Stepwise form of the two-stage flow: WLS + chi-square first; on a flag the
/// step is bad data (LNR runs, the filter is skipped); otherwise the EKF steps
/// and the ADI is compared against gamma.
class DetectionPipeline {
public:
    DetectionPipeline(const MeasurementModel& model, DetectionConfig config);

    StepReport process(int t, const Eigen::VectorXd& z);

    const ForecastingEstimator& filter() const { return fase_; }

private:
    const MeasurementModel* model_;
    DetectionConfig config_;
    ForecastingEstimator fase_;
};

/// Runs the pipeline over a whole trace. Estimator failures are rethrown
/// with the step index.
DetectionReport run_detection_pipeline(const ScenarioTrace& trace, const DetectionConfig& config);

struct DetectionSummary {
    struct Onset {
        int spec = 0;
        int onset = 0;
        int delay = -1;  // steps from onset to first matching flag; -1 if never
    };
    std::vector<Onset> onsets;
    int normal_steps = 0;
    int false_alarms = 0;

    double false_alarm_rate() const {
        return normal_steps == 0 ? 0.0 : static_cast<double>(false_alarms) / normal_steps;
    }
};

DetectionSummary summarize(const ScenarioTrace& trace, const DetectionReport& report);

void write_report_csv(const DetectionReport& report, const std::string& path,
                      const std::string& header_comment = {});

}  // namespace gridad
