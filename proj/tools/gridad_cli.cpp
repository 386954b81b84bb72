#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "gridad/error.hpp"
#include "gridad/parallel.hpp"

namespace {

using gridad::DetectionConfig;

// Detection thresholds and filter parameters shared by every command that
// runs the pipeline.
void add_detection_flags(CLI::App* cmd, DetectionConfig& c) {
    cmd->add_option("--chi2-probability", c.chi2_probability, "chi-square confidence level")
        ->check(CLI::Range(0.5, 0.999999));
    cmd->add_option("--gamma", c.gamma, "ADI threshold")->check(CLI::PositiveNumber);
    cmd->add_option("--lnr-tau", c.lnr_tau, "largest normalized residual threshold")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--alpha", c.fase.holt.alpha, "Holt level smoothing")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--beta", c.fase.holt.beta, "Holt trend smoothing")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--process-noise", c.fase.process_noise, "EKF process noise q (Q = q I)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--initial-covariance", c.fase.initial_covariance, "EKF P0 = p I")
        ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace gridad::cli;
    CLI::App app{"Grid anomaly detection and classification toolkit"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "OpenMP threads (default: all)");

    SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "simulate scenario traces");
    auto* src = simulate->add_option_group("source");
    src->add_option("--scenario", sim.scenario, "scenario config JSON")->check(CLI::ExistingFile);
    src->add_option("--grid", sim.grid, "scenario grid JSON")->check(CLI::ExistingFile);
    src->require_option(1);
    simulate->add_option("--out", sim.out_dir, "output directory")->required();
    simulate->add_option("--seed", sim.seed, "master seed")->required();

    DetectOptions det;
    auto* detect = app.add_subcommand("detect", "run the two-stage detector over traces");
    detect->add_option("traces", det.traces, "trace CSVs or directories")->required();
    detect->add_option("--out", det.out_dir, "report directory")->required();
    add_detection_flags(detect, det.config);

    BuildDatasetOptions bd;
    auto* build = app.add_subcommand("build-dataset", "replay detection and assemble flagged samples");
    build->add_option("traces", bd.traces, "trace CSVs or directories")->required();
    build->add_option("--task", bd.task, "classify | identify-SLC | identify-FDIA")
        ->check(CLI::IsMember({"classify", "identify-SLC", "identify-FDIA"}));
    build->add_option("--split", bd.split, "stratified | holdout")
        ->check(CLI::IsMember({"stratified", "holdout"}));
    build->add_option("--fraction", bd.fraction, "train fraction for the stratified split");
    build->add_option("--train-topologies", bd.train_topologies, "topology ids trained on in holdout mode");
    build->add_flag("--balance", bd.balance, "downsample classes to the smallest one");
    build->add_option("--min-class-count", bd.min_class_count, "drop classes with fewer samples (0 = keep all)");
    build->add_option("--seed", bd.seed, "split and balancing seed")->required();
    build->add_option("--out", bd.out, "dataset CSV")->required();
    add_detection_flags(build, bd.config);

    SelectOptions sel;
    auto* select = app.add_subcommand("select-features", "MRMR feature ranking");
    select->add_option("--dataset", sel.dataset, "dataset CSV")->required()->check(CLI::ExistingFile);
    select->add_option("--k", sel.k, "features to keep");
    select->add_option("--out", sel.out, "selection JSON")->required();

    TrainOptions tr;
    auto* train = app.add_subcommand("train", "train on the train split and score the test split");
    train->add_option("--dataset", tr.dataset, "dataset CSV")->required()->check(CLI::ExistingFile);
    train->add_option("--model", tr.model, "rf | gbt | lr | knn")
        ->check(CLI::IsMember({"rf", "gbt", "xgb", "lr", "knn"}));
    train->add_option("--selection", tr.selection, "selection JSON from select-features")
        ->check(CLI::ExistingFile);
    train->add_option("--params", tr.params, "model parameters as inline JSON");
    train->add_option("--tune", tr.tune_budget, "random-search budget (0 = no tuning)")
        ->check(CLI::NonNegativeNumber);
    train->add_option("--seed", tr.seed, "training seed")->required();
    train->add_option("--model-out", tr.model_out, "model JSON")->required();
    train->add_option("--metrics-out", tr.metrics_out, "metrics JSON");

    EvaluateOptions ev;
    auto* evaluate = app.add_subcommand("evaluate", "score a saved model on a dataset");
    evaluate->add_option("--dataset", ev.dataset, "dataset CSV")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--model", ev.model_file, "model JSON")->required()->check(CLI::ExistingFile);
    evaluate->add_option("--metrics-out", ev.metrics_out, "metrics JSON");

    CalibrateOptions cal;
    auto* calibrate = app.add_subcommand("calibrate-gamma", "sweep the ADI threshold over traces");
    calibrate->add_option("traces", cal.traces, "trace CSVs or directories")->required();
    calibrate->add_option("--min", cal.gamma_min, "first gamma");
    calibrate->add_option("--max", cal.gamma_max, "last gamma");
    calibrate->add_option("--step", cal.gamma_step, "gamma increment");
    calibrate->add_option("--window", cal.window, "steps after onset an event may take to peak");
    calibrate->add_option("--out", cal.out, "sweep CSV")->required();
    add_detection_flags(calibrate, cal.config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        gridad::set_max_threads(threads);
        if (*simulate) return run_simulate(sim);
        if (*detect) return run_detect(det);
        if (*build) return run_build_dataset(bd);
        if (*select) return run_select_features(sel);
        if (*train) return run_train(tr);
        if (*evaluate) return run_evaluate(ev);
        if (*calibrate) return run_calibrate_gamma(cal);
    } catch (const gridad::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
