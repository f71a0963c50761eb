#include <random>

#include <benchmark/benchmark.h>

#include "hrcal/features.hpp"
#include "hrcal/models/model.hpp"
#include "hrcal/signal.hpp"
#include "hrcal/synth.hpp"

using namespace hrcal;

namespace {

Eigen::MatrixXd random_design(int n, int d, Eigen::VectorXd& y) {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    Eigen::MatrixXd X(n, d);
    y.resize(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) X(i, j) = n01(rng);
        y[i] = 2 * X(i, 0) - X(i, d - 1) + 0.3 * n01(rng);
    }
    return X;
}

void BM_ExtractSmoothedHr(benchmark::State& state) {
    synth::CohortConfig cfg;
    cfg.rs_min = static_cast<double>(state.range(0));
    cfg.ls_min_low = cfg.ls_min_high = 1;
    cfg.is_speeds_kmh = {0};
    cfg.is_segment_min = {1};
    const auto p = synth::generate_participant(cfg, 0);
    for (auto _ : state) benchmark::DoNotOptimize(signal::extract_smoothed_hr(p.session.ecg, {}));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(p.session.ecg.size()));
}
BENCHMARK(BM_ExtractSmoothedHr)->Arg(5)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_SvrFit(benchmark::State& state) {
    Eigen::VectorXd y;
    const auto X = random_design(static_cast<int>(state.range(0)), 12, y);
    models::SvrParams p;
    p.C = 10;
    for (auto _ : state) benchmark::DoNotOptimize(models::svr_fit(X, y, p));
}
BENCHMARK(BM_SvrFit)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_MutualInformation(benchmark::State& state) {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    std::vector<double> x(static_cast<std::size_t>(state.range(0))), y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = n01(rng);
        y[i] = 0.5 * x[i] + n01(rng);
    }
    for (auto _ : state) benchmark::DoNotOptimize(features::mutual_information(x, y));
}
BENCHMARK(BM_MutualInformation)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ForestFit(benchmark::State& state) {
    Eigen::VectorXd y;
    const auto X = random_design(2000, 6, y);
    models::RfParams p;
    p.n_estimators = static_cast<int>(state.range(0));
    p.max_features = 3;
    for (auto _ : state) benchmark::DoNotOptimize(models::rf_fit(X, y, p));
}
BENCHMARK(BM_ForestFit)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_GpPredict(benchmark::State& state) {
    Eigen::VectorXd y;
    const auto X = random_design(static_cast<int>(state.range(0)), 4, y);
    models::GpParams p;
    p.optimize = false;
    p.alpha = 1e-3;
    const auto m = models::gp_fit(X, y, p);
    const double x[] = {0.1, 0.2, 0.3, 0.4};
    for (auto _ : state) benchmark::DoNotOptimize(m.predict(x));
}
BENCHMARK(BM_GpPredict)->Arg(500)->Arg(2000);

void BM_RollingWindows(benchmark::State& state) {
    features::FeatureMatrix m({"device_hr", "pal", "step_rate", "bmi"});
    for (int i = 0; i < 20000; ++i) {
        const double row[] = {70.0 + i % 7, 1.0, 90.0, 22.0};
        m.append_row(row, 71.0, 70.0, 15.0 * i + (i % 500 == 0 ? 60.0 : 0.0), ActivityState::LS,
                     "P" + std::to_string(i / 5000));
    }
    features::WindowSpec w;
    w.size_points = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(features::build_rolling_windows(m, w));
}
BENCHMARK(BM_RollingWindows)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
