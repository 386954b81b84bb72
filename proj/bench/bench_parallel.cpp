// Serial vs OpenMP timing for the parallel kernels. Each pair must produce
// the same result; the bench exits non-zero if one does not.
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "gridad/batch.hpp"
#include "gridad/dataset.hpp"
#include "gridad/ml/knn.hpp"
#include "gridad/ml/random_forest.hpp"
#include "gridad/mrmr.hpp"
#include "gridad/parallel.hpp"

using namespace gridad;

namespace {

double seconds(const std::function<void()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool report(const char* name, double serial, double parallel, bool same) {
    std::printf("%-16s serial %8.3f s  parallel %8.3f s  speedup %5.2fx  %s\n", name, serial, parallel,
                serial / parallel, same ? "identical" : "MISMATCH");
    return same;
}

}  // namespace

int main(int argc, char** argv) {
    const int repeats = argc > 1 ? std::stoi(argv[1]) : 1;
    std::printf("threads %d\n", max_threads());

    const nlohmann::json grid = {{"steps", 30},
                                 {"topologies", {0, 1, 2, 3, 4}},
                                 {"repeats", repeats},
                                 {"slc", {{"buses", "load"}, {"fractions", {0.75, 1.0}}, {"onset", 15}}},
                                 {"fdia", {{"states", "magnitudes"}, {"offsets", {0.05}}, {"onset", 15}}}};
    const auto configs = expand_grid(grid, 1);
    bool ok = true;

    std::vector<ScenarioTrace> ts, tp;
    const double sim_s = seconds([&] { ts = simulate_batch(configs, Execution::Serial); });
    const double sim_p = seconds([&] { tp = simulate_batch(configs, Execution::Parallel); });
    bool same = ts.size() == tp.size();
    for (std::size_t i = 0; same && i < ts.size(); ++i)
        for (std::size_t t = 0; same && t < ts[i].steps.size(); ++t) same = ts[i].steps[t].z == tp[i].steps[t].z;
    ok &= report("simulate_batch", sim_s, sim_p, same);

    std::vector<DetectionReport> rs, rp;
    const DetectionConfig cfg;
    const double det_s = seconds([&] { rs = detect_batch(ts, cfg, Execution::Serial); });
    const double det_p = seconds([&] { rp = detect_batch(ts, cfg, Execution::Parallel); });
    same = true;
    for (std::size_t i = 0; same && i < rs.size(); ++i)
        for (std::size_t t = 0; same && t < rs[i].steps.size(); ++t)
            same = rs[i].steps[t].max_adi == rp[i].steps[t].max_adi;
    ok &= report("detect_batch", det_s, det_p, same);

    Dataset ds = assemble_dataset(ts, rs, Task::Classify);
    ds = balance_classes(ds, 2);
    std::printf("dataset %d samples x %d features\n", ds.size(), ds.feature_count());

    SelectionResult ms, mp;
    const double mr_s = seconds([&] { ms = mrmr_select(ds, 70, Execution::Serial); });
    const double mr_p = seconds([&] { mp = mrmr_select(ds, 70, Execution::Parallel); });
    ok &= report("mrmr_select", mr_s, mr_p, ms.indices == mp.indices && ms.scores == mp.scores);

    ml::ForestParams fp;
    fp.seed = 9;
    ml::RandomForest fs, fpar;
    const double rf_s = seconds([&] { fs = ml::train_random_forest(ds.features, ds.labels, 2, fp, Execution::Serial); });
    const double rf_p = seconds([&] { fpar = ml::train_random_forest(ds.features, ds.labels, 2, fp, Execution::Parallel); });
    ok &= report("random_forest", rf_s, rf_p, fs.to_json() == fpar.to_json());

    const auto knn = ml::train_knn(ds.features, ds.labels, 2, {5});
    std::vector<int> ks, kp;
    const double kn_s = seconds([&] { ks = knn.predict_batch(ds.features, Execution::Serial); });
    const double kn_p = seconds([&] { kp = knn.predict_batch(ds.features, Execution::Parallel); });
    ok &= report("knn_predict", kn_s, kn_p, ks == kp);

    return ok ? 0 : 1;
}
