#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hrcal/errors.hpp"
#include "hrcal/models/model.hpp"
#include "oracles.hpp"

using namespace hrcal;
using namespace hrcal::models;

namespace {

Eigen::MatrixXd random_matrix(int n, int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) X(i, j) = n01(rng);
    return X;
}

Eigen::VectorXd linear_target(const Eigen::MatrixXd& X, std::mt19937_64& rng, double noise = 0.1) {
    std::normal_distribution<double> n01;
    Eigen::VectorXd y(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) y[i] = 2.0 * X(i, 0) - X(i, X.cols() - 1) + noise * n01(rng);
    return y;
}

}  // namespace

TEST(Kernel, Values) {
    const double a[] = {1, 0}, b[] = {0, 1};
    EXPECT_NEAR(kernel_eval(KernelSpec::rbf(0.5), a, b), std::exp(-1.0), 1e-15);
    EXPECT_NEAR(kernel_eval(KernelSpec::poly(1.0, 2), a, a), 4.0, 1e-15);
    EXPECT_THROW(validate(KernelSpec::rbf(0.0)), ConfigError);
    EXPECT_THROW(validate(KernelSpec::poly(1.0, 1)), ConfigError);
}

TEST(Svr, MatchesDenseQp) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const auto X = random_matrix(12, 2, rng);
        const auto y = linear_target(X, rng, 0.5);
        SvrParams p;
        p.C = 2.0;
        p.epsilon = 0.2;
        p.kernel = KernelSpec::rbf(0.5);
        p.tol = 1e-6;
        const auto m = svr_fit(X, y, p);
        const auto K = kernel_matrix(p.kernel, X);
        EXPECT_TRUE(K.isApprox(oracle::rbf_gram(X, X, 0.5), 1e-14));
        const auto qp = oracle::svr_dual_qp(K, y, p.C, p.epsilon);
        EXPECT_NEAR(m.dual_objective, qp.objective, 1e-6);
        EXPECT_NEAR(svr_dual_objective(K, y, p.epsilon, m.alpha, m.alpha_star), m.dual_objective, 1e-9);
        EXPECT_NEAR(std::abs((m.alpha - m.alpha_star).sum()), 0.0, 1e-10);
        EXPECT_GE(m.alpha.minCoeff(), 0.0);
        EXPECT_LE(m.alpha_star.maxCoeff(), p.C);
    }
}

TEST(Svr, ConvergenceErrorCarriesIterate) {
    std::mt19937_64 rng(8);
    const auto X = random_matrix(40, 2, rng);
    const auto y = linear_target(X, rng);
    SvrParams p;
    p.C = 100;
    p.max_iter = 2;
    p.tol = 1e-12;
    try {
        svr_fit(X, y, p);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_FALSE(e.best_iterate.converged);
        EXPECT_EQ(e.best_iterate.iterations, 2);
    }
}

TEST(Gp, MatchesDirectInverse) {
    std::mt19937_64 rng(9);
    const auto X = random_matrix(8, 3, rng);
    const auto y = linear_target(X, rng);
    GpParams p;
    p.optimize = false;
    p.alpha = 1e-3;
    p.length_scales = {0.7, 1.3, 2.0};
    const auto m = gp_fit(X, y, p);
    const double x[] = {0.1, -0.4, 0.8};
    const auto o = oracle::gp_direct(X, y, p.length_scales, p.alpha, true, x);
    const auto g = m.predict(x);
    EXPECT_NEAR(g.mean, o.mean, 1e-8);
    EXPECT_NEAR(g.variance, o.variance, 1e-8);
}

TEST(Gp, LmlGradientMatchesFiniteDifference) {
    std::mt19937_64 rng(10);
    const auto X = random_matrix(15, 2, rng);
    Eigen::VectorXd y = linear_target(X, rng);
    y = (y.array() - y.mean()) / std::sqrt((y.array() - y.mean()).square().mean());
    std::vector<double> ls{0.8, 1.5}, grad;
    gp_log_marginal_likelihood(X, y, ls, 1e-2, &grad);
    for (std::size_t d = 0; d < ls.size(); ++d) {
        const double h = 1e-5;
        auto up = ls, down = ls;
        up[d] *= std::exp(h);
        down[d] *= std::exp(-h);
        const double fd = (gp_log_marginal_likelihood(X, y, up, 1e-2) - gp_log_marginal_likelihood(X, y, down, 1e-2)) /
                          (2 * h);
        EXPECT_NEAR(grad[d], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
}

TEST(Gp, OptimisationTraceIsMonotone) {
    std::mt19937_64 rng(12);
    const auto X = random_matrix(30, 2, rng);
    const auto y = linear_target(X, rng);
    GpParams p;
    p.alpha = 1e-2;
    const auto m = gp_fit(X, y, p);
    for (std::size_t i = 1; i < m.lml_trace.size(); ++i) EXPECT_GE(m.lml_trace[i], m.lml_trace[i - 1] - 1e-12);
}

TEST(Mlp, GradientMatchesFiniteDifference) {
    std::mt19937_64 rng(13);
    const auto X = random_matrix(16, 3, rng);
    const auto y = linear_target(X, rng);
    const auto net = mlp_init(3, {8, 4}, false, 5);
    std::vector<double> g;
    mlp_loss_and_gradient(net, X, y, &g);
    const auto fd = oracle::mlp_fd_gradient(net, X, y, 1e-6);
    ASSERT_EQ(g.size(), fd.size());
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g[i], fd[i], 1e-6 + 1e-5 * std::abs(fd[i]));
}

TEST(Mlp, FlattenRoundTripAndFit) {
    const auto net = mlp_init(2, {4}, false, 1);
    auto copy = net;
    copy.unflatten(net.flatten());
    EXPECT_EQ(copy.flatten(), net.flatten());
    EXPECT_EQ(net.parameter_count(), 2u * 4 + 4 + 4 + 1);

    std::mt19937_64 rng(14);
    const auto X = random_matrix(200, 2, rng);
    const auto y = linear_target(X, rng);
    MlpParams p;
    p.hidden = {8, 4};
    p.learning_rate = 0.01;
    p.epochs = 150;
    const auto m = mlp_fit(X, y, p);
    double err = 0;
    for (int i = 0; i < 200; ++i) {
        const double x[] = {X(i, 0), X(i, 1)};
        err += std::abs(m.predict(x) - y[i]);
    }
    EXPECT_LT(err / 200, 0.5);
}

TEST(Forest, StumpMatchesExhaustiveSplit) {
    std::mt19937_64 rng(15);
    const auto X = random_matrix(40, 3, rng);
    const auto y = linear_target(X, rng);
    RfParams p;
    p.max_features = 3;
    p.max_depth = 1;
    p.min_samples_leaf = 1;
    std::vector<int> rows(40);
    for (int i = 0; i < 40; ++i) rows[i] = i;
    const auto tree = grow_tree(X, y, rows, p, 1);
    ASSERT_EQ(tree.nodes.size(), 3u);

    double best = INFINITY;
    int best_f = -1;
    double best_t = 0;
    for (int f = 0; f < 3; ++f)
        for (int i = 0; i < 40; ++i) {
            const double t = X(i, f);
            double sl = 0, sr = 0, ql = 0, qr = 0;
            int nl = 0, nr = 0;
            for (int r = 0; r < 40; ++r) {
                if (X(r, f) <= t) {
                    sl += y[r];
                    ql += y[r] * y[r];
                    ++nl;
                } else {
                    sr += y[r];
                    qr += y[r] * y[r];
                    ++nr;
                }
            }
            if (nl == 0 || nr == 0) continue;
            const double sse = ql - sl * sl / nl + qr - sr * sr / nr;
            if (sse < best) {
                best = sse;
                best_f = f;
                best_t = t;
            }
        }
    EXPECT_EQ(tree.nodes[0].feature, best_f);
    // threshold lies between best_t and the next value above it
    EXPECT_GE(tree.nodes[0].threshold, best_t);
    for (int r = 0; r < 40; ++r)
        if (X(r, best_f) > best_t) EXPECT_LT(tree.nodes[0].threshold, X(r, best_f));
}

TEST(Forest, DeterministicAndDepthBounded) {
    std::mt19937_64 rng(16);
    const auto X = random_matrix(100, 2, rng);
    const auto y = linear_target(X, rng);
    RfParams p;
    p.n_estimators = 20;
    p.max_depth = 4;
    p.seed = 3;
    const auto a = rf_fit(X, y, p);
    const auto b = rf_fit(X, y, p);
    const double x[] = {0.3, -0.2};
    EXPECT_EQ(a.predict(x), b.predict(x));
    for (const auto& t : a.trees) EXPECT_LE(t.depth(), 4);
}

TEST(Knn, MatchesBruteForce) {
    std::mt19937_64 rng(17);
    const auto X = random_matrix(60, 2, rng);
    const auto y = linear_target(X, rng);
    for (int p : {1, 2, 3}) {
        const auto m = knn_fit(X, y, {5, p});
        const double x[] = {0.2, 0.1};
        std::vector<std::pair<double, int>> d;
        for (int i = 0; i < 60; ++i) {
            double s = 0;
            for (int c = 0; c < 2; ++c) s += std::pow(std::abs(X(i, c) - x[c]), p);
            d.push_back({std::pow(s, 1.0 / p), i});
        }
        std::sort(d.begin(), d.end());
        double mean = 0;
        for (int k = 0; k < 5; ++k) mean += y[d[k].second] / 5;
        EXPECT_NEAR(m.predict(x), mean, 1e-12);
        EXPECT_EQ(m.neighbors(x)[0], d[0].second);
    }
    EXPECT_THROW(knn_fit(X, y, {61, 2}), ConfigError);
}

TEST(SigmoidLr, FitsMonotoneTargetAndHandlesConstant) {
    std::mt19937_64 rng(18);
    const auto X = random_matrix(100, 1, rng);
    Eigen::VectorXd y(100);
    for (int i = 0; i < 100; ++i) y[i] = 60 + 10 * X(i, 0);
    const auto m = sigmoid_lr_fit(X, y, {100.0});
    const double lo[] = {-1.0}, hi[] = {1.0};
    EXPECT_LT(m.predict(lo), m.predict(hi));
    EXPECT_THROW(make_target_map(std::vector<double>(5, 1.0)), DegenerateTargetError);
    const auto c = sigmoid_lr_fit(X, Eigen::VectorXd::Constant(100, 70.0), {});
    EXPECT_TRUE(c.constant);
    EXPECT_EQ(c.predict(lo), 70.0);
}

TEST(Grid, SizesAndLabels) {
    EXPECT_EQ(grid_size(Algorithm::svr), 6u * 6 * 6 * (1 + 4));
    EXPECT_EQ(grid_size(Algorithm::knn), 30u);
    EXPECT_EQ(grid_size(Algorithm::mlp), 21u);
    EXPECT_EQ(GridAxes::range(10, 49, 3).back(), 49);
    const auto g = expand_grid(Algorithm::gp);
    EXPECT_EQ(g.size(), 6u);
    EXPECT_EQ(g[0].algorithm(), Algorithm::gp);
    EXPECT_EQ(parse_algorithm("knn"), Algorithm::knn);
    EXPECT_THROW(parse_algorithm("xgb"), ConfigError);
}

TEST(TrainedModel, SerializeRoundTrip) {
    features::FeatureMatrix m({"device_hr", "pal"});
    std::mt19937_64 rng(19);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 80; ++i) {
        const double row[] = {70 + 10 * n01(rng), static_cast<double>(i % 4)};
        m.append_row(row, row[0] + 2 * row[1], row[0], 15.0 * i, ActivityState::IS, "P01");
    }
    GridAxes axes;
    axes.rf_n_estimators = {5};
    axes.rf_max_depth = {4};
    axes.rf_min_samples_split = {2};
    axes.rf_min_samples_leaf = {2};
    axes.rf_max_features = {2};
    axes.knn_k = {5};
    axes.knn_p = {2};
    axes.mlp_hidden = {{4}};
    axes.mlp_learning_rate = {0.01};
    for (auto alg : {Algorithm::svr, Algorithm::rf, Algorithm::gp, Algorithm::mlp, Algorithm::sigmoid_lr,
                     Algorithm::knn}) {
        const auto spec = expand_grid(alg, axes).front();
        const auto fitted = TrainedModel::fit(spec, m);
        const auto back = TrainedModel::deserialize(fitted.serialize());
        EXPECT_EQ(back.spec().label(), spec.label());
        const auto a = fitted.predict(m), b = back.predict(m);
        for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9 * std::max(1.0, std::abs(a[i])));
        EXPECT_EQ(back.serialize(), fitted.serialize());
    }
    EXPECT_THROW(TrainedModel::deserialize("garbage"), ParseError);
}

TEST(TrainedModel, ColumnMismatchIsShapeError) {
    features::FeatureMatrix m({"device_hr"});
    for (int i = 0; i < 20; ++i) {
        const double row[] = {60.0 + i};
        m.append_row(row, 61.0 + i, 60.0 + i, 15.0 * i, ActivityState::RS, "P01");
    }
    const auto model = TrainedModel::fit(expand_grid(Algorithm::gp).front(), m);
    EXPECT_THROW(model.predict(m.select_columns({})), ShapeError);
}
