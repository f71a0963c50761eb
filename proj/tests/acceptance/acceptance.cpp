// Acceptance criteria runner. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. A single criterion can be selected by number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <spdlog/spdlog.h>

#include "hrcal/activity.hpp"
#include "hrcal/eval.hpp"
#include "hrcal/features.hpp"
#include "hrcal/parallel.hpp"
#include "hrcal/signal.hpp"
#include "hrcal/synth.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"

namespace fs = std::filesystem;
using namespace hrcal;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome signal_oracle() {
    const auto t0 = Clock::now();
    synth::CohortConfig cfg;
    cfg.n_participants = 6;
    cfg.seed = 101;
    const signal::ExtractionConfig ex;
    std::vector<double> err(6);
    parallel_for(6, 1, [&](std::size_t i) {
        const auto p = synth::generate_participant(cfg, static_cast<int>(i));
        const auto hr = signal::extract_smoothed_hr(p.session.ecg, ex);
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t k = 0; k < hr.size(); ++k) {
            const double t = hr.series.t[k];
            bool band = false;
            for (const auto& e : p.session.schedule)
                band = band || std::abs(t - e.t_start) < 10.0 || std::abs(t - e.t_end) < 10.0;
            if (band || !state_at(p.session.schedule, t)) continue;
            sum += std::abs(hr.series.v[k] - synth::truth_at(p.truth, t));
            ++n;
        }
        err[i] = sum / static_cast<double>(n);
    });
    double worst = 0.0, total = 0.0;
    for (double e : err) {
        worst = std::max(worst, e);
        total += e / 6.0;
    }
    const double secs = seconds_since(t0);
    return {worst < 1.0 && secs < 60.0,
            fmt("mean MAE %.3f bpm, worst participant %.3f bpm, %.1f s", total, worst, secs)};
}

Outcome svr_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(202);
    std::uniform_int_distribution<int> size(3, 20), dims(1, 4);
    std::uniform_real_distribution<double> unit(-2.0, 2.0);
    const double Cs[] = {0.1, 1.0, 10.0}, eps[] = {0.01, 0.1, 0.5}, gammas[] = {0.1, 0.5, 2.0};
    double worst_obj = 0.0, worst_pred = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        const int n = size(rng), d = dims(rng);
        Eigen::MatrixXd X(n, d);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) X(i, j) = unit(rng);
            y[i] = std::sin(2.0 * X(i, 0)) + 0.3 * unit(rng);
        }
        models::SvrParams p;
        p.C = Cs[trial % 3];
        p.epsilon = eps[(trial / 3) % 3];
        p.kernel = models::KernelSpec::rbf(gammas[(trial / 9) % 3]);
        p.tol = 1e-6;
        const auto m = models::svr_fit(X, y, p);
        const auto K = oracle::rbf_gram(X, X, p.kernel.gamma);
        const auto qp = oracle::svr_dual_qp(K, y, p.C, p.epsilon);
        worst_obj = std::max(worst_obj, std::abs(m.dual_objective - qp.objective));
        const Eigen::VectorXd beta = qp.alpha - qp.alpha_star;
        for (int q = 0; q < 10; ++q) {
            Eigen::MatrixXd x(1, d);
            for (int j = 0; j < d; ++j) x(0, j) = unit(rng);
            const double ref = (oracle::rbf_gram(x, X, p.kernel.gamma) * beta)(0) + qp.bias;
            const std::vector<double> xv(x.data(), x.data() + d);
            worst_pred = std::max(worst_pred, std::abs(m.predict(xv) - ref));
        }
    }
    const double secs = seconds_since(t0);
    return {worst_obj < 1e-3 && worst_pred < 1e-3 && secs < 120.0,
            fmt("max |dual diff| %.2e, max |prediction diff| %.2e, %.1f s", worst_obj, worst_pred, secs)};
}

Outcome gp_oracle() {
    std::mt19937_64 rng(303);
    std::uniform_int_distribution<int> size(5, 10), dims(1, 3);
    std::uniform_real_distribution<double> unit(-1.5, 1.5), ls(0.5, 2.0);
    const double alphas[] = {1e-10, 1e-5, 1e-3, 1e-1, 1.0};
    double worst_mean = 0.0, worst_var = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = size(rng), d = dims(rng);
        Eigen::MatrixXd X(n, d);
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) X(i, j) = unit(rng);
            y[i] = 70.0 + 10.0 * X(i, 0) + unit(rng);
        }
        models::GpParams p;
        p.optimize = false;
        p.alpha = alphas[trial % 5] < 1e-6 ? 1e-6 : alphas[trial % 5];
        for (int j = 0; j < d; ++j) p.length_scales.push_back(ls(rng));
        const auto m = models::gp_fit(X, y, p);
        for (int q = 0; q < 5; ++q) {
            std::vector<double> x(static_cast<std::size_t>(d));
            for (auto& v : x) v = unit(rng);
            const auto a = m.predict(x);
            const auto b = oracle::gp_direct(X, y, p.length_scales, p.alpha, true, x);
            worst_mean = std::max(worst_mean, std::abs(a.mean - b.mean));
            worst_var = std::max(worst_var, std::abs(a.variance - b.variance));
        }
    }
    return {worst_mean < 1e-8 && worst_var < 1e-8,
            fmt("max |mean diff| %.2e, max |variance diff| %.2e", worst_mean, worst_var)};
}

Outcome mlp_gradients() {
    const models::GridAxes axes;
    double worst = 0.0;
    std::mt19937_64 rng(404);
    std::normal_distribution<double> n01;
    for (const auto& arch : axes.mlp_hidden) {
        for (int batch = 0; batch < 10; ++batch) {
            const int n = 32, d = 4;
            Eigen::MatrixXd X(n, d);
            Eigen::VectorXd y(n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < d; ++j) X(i, j) = n01(rng);
                y[i] = X(i, 0) - 0.5 * X(i, 1) * X(i, 2) + 0.1 * n01(rng);
            }
            const auto net = models::mlp_init(d, arch, false, static_cast<std::uint64_t>(batch) + 1);
            std::vector<double> g;
            models::mlp_loss_and_gradient(net, X, y, &g);
            const auto fd = oracle::mlp_fd_gradient(net, X, y, 1e-6);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) {
                num = std::max(num, std::abs(g[i] - fd[i]));
                den = std::max(den, std::max(std::abs(g[i]), std::abs(fd[i])));
            }
            worst = std::max(worst, num / std::max(den, 1e-12));
        }
    }
    return {worst < 1e-4, fmt("max relative error %.2e over %zu architectures x 10 batches", worst,
                              axes.mlp_hidden.size())};
}

Outcome mi_estimator() {
    const double rhos[] = {0.0, 0.5, 0.9};
    std::string detail;
    bool pass = true;
    std::mt19937_64 rng(505);
    std::normal_distribution<double> n01;
    for (double rho : rhos) {
        std::vector<double> x(10000), y(10000);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = n01(rng);
            y[i] = rho * x[i] + std::sqrt(1 - rho * rho) * n01(rng);
        }
        const double est = features::mutual_information(x, y, 3, false, 7);
        const double exact = -0.5 * std::log(1 - rho * rho);
        pass = pass && std::abs(est - exact) < 0.07;
        detail += fmt("rho=%.1f est %.4f exact %.4f; ", rho, est, exact);
    }
    return {pass, detail};
}

Outcome f_test_oracle() {
    std::mt19937_64 rng(606);
    std::normal_distribution<double> n01;
    double worst = 0.0;
    for (int c = 0; c < 10; ++c) {
        const int n = 40;
        const double slope = 0.05 * c;
        std::vector<double> x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x[i] = n01(rng);
            y[i] = slope * x[i] + n01(rng);
        }
        const double p = features::f_test(x, y).p_value;
        const double q = oracle::permutation_p(x, y, 10000, 1000 + static_cast<std::uint64_t>(c));
        worst = std::max(worst, std::abs(p - q));
    }
    return {worst < 0.02, fmt("max |p_F - p_perm| %.4f", worst)};
}

Outcome pal_cut_points() {
    struct Literal {
        const activity::PalScheme* scheme;
        int sed, lpa, mpa;  // inclusive upper bounds
    };
    const Literal table[] = {{&activity::crouter_va(), 35, 360, 1129},
                             {&activity::crouter_vm(), 100, 609, 1809},
                             {&activity::freedson_va(), 99, 759, 5724},
                             {&activity::troiano_va(), 100, 2019, 5998}};
    std::size_t mismatches = 0;
    for (const auto& lit : table)
        for (int c = 0; c <= 10000; ++c) {
            const int expect = c <= lit.sed ? 0 : c <= lit.lpa ? 1 : c <= lit.mpa ? 2 : 3;
            if (static_cast<int>(activity::classify_pal(c, *lit.scheme)) != expect) ++mismatches;
        }
    using activity::PalLevel;
    const bool boundaries = activity::classify_pal(35, activity::crouter_va()) == PalLevel::SED &&
                            activity::classify_pal(36, activity::crouter_va()) == PalLevel::LPA &&
                            activity::classify_pal(1129, activity::crouter_va()) == PalLevel::MPA &&
                            activity::classify_pal(1130, activity::crouter_va()) == PalLevel::VPA &&
                            activity::classify_pal(100, activity::crouter_vm()) == PalLevel::SED &&
                            activity::classify_pal(101, activity::crouter_vm()) == PalLevel::LPA &&
                            activity::classify_pal(2019, activity::troiano_va()) == PalLevel::LPA &&
                            activity::classify_pal(2020, activity::troiano_va()) == PalLevel::MPA;
    return {mismatches == 0 && boundaries,
            fmt("%zu mismatches over 4 x 10001 counts, boundaries %s", mismatches, boundaries ? "exact" : "wrong")};
}

Outcome rolling_windows() {
    std::mt19937_64 rng(808);
    std::uniform_int_distribution<int> seg_count(1, 8), seg_len(0, 40), gap(2, 6);
    std::size_t bad = 0, checks = 0;
    for (int pattern = 0; pattern < 100; ++pattern) {
        features::FeatureMatrix m({"device_hr", "pal", "step_rate", "bmi"});
        std::vector<std::size_t> segs;
        double t = 0.0;
        for (int s = seg_count(rng); s > 0; --s) {
            const auto n = static_cast<std::size_t>(seg_len(rng));
            segs.push_back(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double row[] = {70.0, 1.0, 80.0, 23.0};
                m.append_row(row, 71.0, 70.0, t, ActivityState::LS, "P01");
                t += 15.0;
            }
            t += 15.0 * gap(rng);
        }
        for (int w : {5, 10, 15}) {
            features::WindowSpec spec;
            spec.size_points = w;
            ++checks;
            if (features::build_rolling_windows(m, spec).rows() != oracle::expected_window_rows(segs, w)) ++bad;
        }
    }
    return {bad == 0, fmt("%zu of %zu pattern/window checks disagree", bad, checks)};
}

Outcome end_to_end() {
    const auto t0 = Clock::now();
    cli::PipelineConfig pc = cli::build_pipeline_config(cli::Config::parse(
        "seed = 42\nsynth.n_participants = 12\nmethods = svr:rolling\nwindow.size = 10\n"));
    const auto sessions = cli::load_processed(pc);
    const auto m = features::assemble_matrix(sessions, pc.assembly);
    const auto out = eval::evaluate_loso(m, pc.eval);
    const auto& row = out.report.find("svr_rolling", StateTag::ALL);
    int better = 0;
    for (std::size_t i = 0; i < row.participants.size(); ++i)
        if (row.participant_mae[i] < row.participant_raw_mae[i]) ++better;
    const double p = row.t_test ? row.t_test->p_value : 1.0;
    const double secs = seconds_since(t0);
    return {better >= 10 && row.participants.size() == 12 && p < 0.05 && secs < 600.0,
            fmt("%d/%zu folds improved, MAE %.2f vs raw %.2f bpm, paired t p=%.2e, %.0f s", better,
                row.participants.size(), row.mae, row.raw_mae, p, secs)};
}

Outcome statistics_fixtures() {
    const double v[] = {1, 2, 3};
    const auto ms = eval::mae_se(v);
    const double red = eval::error_reduction(3.26, 2.17);
    std::mt19937_64 rng(1010);
    std::normal_distribution<double> n01;
    std::vector<double> a(10000), b(10000, 0.0);
    for (auto& x : a) x = n01(rng);
    const auto ba = eval::bland_altman(a, b);
    const double outside = static_cast<double>(ba.n_outside) / static_cast<double>(ba.n);
    const bool pass = std::abs(ms.mean - 2.0) < 1e-12 && std::abs(ms.se - 0.5774) < 1e-4 &&
                      std::abs(red - 33.44) < 0.01 && outside <= 0.07;
    return {pass, fmt("mae_se=(%.4f, %.4f), reduction %.4f%%, BA outside %.4f", ms.mean, ms.se, red, outside)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "hrcal_acceptance_det";
    fs::remove_all(root);
    fs::create_directories(root);
    std::ofstream(root / "run.cfg") << "seed = 9\nsynth.n_participants = 4\njobs = 2\n"
                                       "methods = svr, svr:rolling, knn\n"
                                       "grid.svr.C = 1,10\ngrid.svr.epsilon = 0.1\ngrid.svr.gamma = 0.1\n";
    for (const char* name : {"a", "b"}) {
        const std::string cmd = std::string(HRCAL_EXE) + " --config " + (root / "run.cfg").string() + " --out " +
                                (root / name).string() + " run";
        if (std::system(cmd.c_str()) != 0) return {false, "hrcal run failed: " + cmd};
    }
    std::size_t files = 0, differ = 0;
    for (const auto& e : fs::directory_iterator(root / "a")) {
        ++files;
        const auto other = root / "b" / e.path().filename();
        if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differ;
    }
    std::size_t files_b = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(root / "b")) ++files_b;
    return {files == 5 && files_b == files && differ == 0,
            fmt("%zu report files, %zu differ", files, differ)};
}

}  // namespace

int main(int argc, char** argv) {
    const char* level = std::getenv("HRCAL_LOG");
    spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"signal oracle", signal_oracle},
        {"svr vs dense qp", svr_oracle},
        {"gp vs direct inverse", gp_oracle},
        {"mlp gradients", mlp_gradients},
        {"mutual information", mi_estimator},
        {"f-test vs permutation", f_test_oracle},
        {"pal cut-points", pal_cut_points},
        {"rolling window rows", rolling_windows},
        {"end-to-end calibration gain", end_to_end},
        {"statistics fixtures", statistics_fixtures},
        {"determinism", determinism},
    };
    const int only = argc > 1 ? std::atoi(argv[1]) : 0;
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only && static_cast<int>(i) + 1 != only) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                    o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
