#include "gridad/detection.hpp"

#include <cmath>
#include <fstream>

#include "gridad/csv.hpp"
#include "gridad/error.hpp"

namespace gridad {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Normal: return "normal";
        case Verdict::BadData: return "bad-data";
        case Verdict::SlcOrFdia: return "anomaly-SLC-or-FDIA";
    }
    return "?";
}

std::vector<int> DetectionReport::flagged_steps() const {
    std::vector<int> out;
    for (const auto& s : steps)
        if (s.verdict == Verdict::SlcOrFdia) out.push_back(s.t);
    return out;
}

Eigen::VectorXd anomaly_detection_index(const Eigen::VectorXd& wls_estimate,
                                        const Eigen::VectorXd& ekf_estimate,
                                        const Eigen::MatrixXd& covariance) {
    if (wls_estimate.size() != ekf_estimate.size() || covariance.rows() != wls_estimate.size())
        throw DataError("ADI inputs have mismatched dimensions");
    const Eigen::VectorXd diag = covariance.diagonal();
    if (!(diag.minCoeff() > 0.0)) throw NumericalError("EKF covariance has a non-positive diagonal");
    return (wls_estimate - ekf_estimate).cwiseAbs().cwiseQuotient(diag.cwiseSqrt());
}

DetectionPipeline::DetectionPipeline(const MeasurementModel& model, DetectionConfig config)
    : model_(&model), config_(config), fase_(model, config.fase) {}

StepReport DetectionPipeline::process(int t, const Eigen::VectorXd& z) {
    StepReport rep;
    rep.t = t;
    const auto wls = estimate_wls(z, *model_, std::nullopt, config_.wls);
    rep.wls_estimate = wls.estimate;
    rep.chi2 = chi_square_test(wls, config_.chi2_probability);
    rep.adi = Eigen::VectorXd::Zero(wls.states());

    if (rep.chi2.flag) {
        rep.verdict = Verdict::BadData;
        rep.lnr = largest_normalized_residual(wls, config_.lnr_tau);
        return rep;
    }
    if (!fase_.initialized()) {
        fase_.initialize(wls.estimate);
        return rep;
    }
    const auto& step = fase_.step(z);
    rep.ekf_ran = true;
    rep.ekf_estimate = fase_.belief().estimate;
    rep.prediction = step.prediction.state;
    rep.normalized_innovations = step.normalized_innovations;
    rep.adi = anomaly_detection_index(wls.estimate, rep.ekf_estimate, fase_.belief().covariance);
    rep.max_adi = rep.adi.maxCoeff(&rep.adi_argmax);
    if (rep.max_adi >= config_.gamma) rep.verdict = Verdict::SlcOrFdia;
    return rep;
}

DetectionReport run_detection_pipeline(const ScenarioTrace& trace, const DetectionConfig& config) {
    const MeasurementModel model(trace.topology, trace.plan);
    DetectionPipeline pipeline(model, config);
    DetectionReport report;
    report.steps.reserve(trace.steps.size());
    for (const auto& step : trace.steps) {
        try {
            report.steps.push_back(pipeline.process(step.t, step.z));
        } catch (const DivergenceError& e) {
            throw DivergenceError("step " + std::to_string(step.t) + ": " + e.what(),
                                  e.last_mismatch(), e.last_iterate());
        } catch (const NumericalError& e) {
            throw NumericalError("step " + std::to_string(step.t) + ": " + e.what());
        }
    }
    return report;
}

DetectionSummary summarize(const ScenarioTrace& trace, const DetectionReport& report) {
    DetectionSummary out;
    for (int k = 0; k < static_cast<int>(trace.specs.size()); ++k) {
        const auto& spec = trace.specs[k];
        const Verdict wanted =
            spec.kind == AnomalyKind::BadData ? Verdict::BadData : Verdict::SlcOrFdia;
        DetectionSummary::Onset o{k, spec.onset, -1};
        const int end = spec.clear.value_or(static_cast<int>(report.steps.size()));
        for (int t = spec.onset; t < end && t < static_cast<int>(report.steps.size()); ++t)
            if (report.steps[t].verdict == wanted) {
                o.delay = t - spec.onset;
                break;
            }
        out.onsets.push_back(o);
    }
    for (std::size_t t = 0; t < report.steps.size() && t < trace.steps.size(); ++t) {
        if (!trace.steps[t].label.normal()) continue;
        ++out.normal_steps;
        if (report.steps[t].verdict != Verdict::Normal) ++out.false_alarms;
    }
    return out;
}

void write_report_csv(const DetectionReport& report, const std::string& path,
                      const std::string& header_comment) {
    CsvWriter csv(path);
    if (!header_comment.empty()) csv.comment(header_comment);
    csv.row({"t", "J", "chi2_flag", "lnr_index", "max_adi", "adi_argmax", "verdict"});
    for (const auto& s : report.steps) {
        csv.row({std::to_string(s.t), format_number(s.chi2.objective), s.chi2.flag ? "1" : "0",
                 s.lnr ? std::to_string(s.lnr->index) : "-1", format_number(s.max_adi),
                 std::to_string(s.adi_argmax), to_string(s.verdict)});
    }
    csv.close();
}

}  // namespace gridad
