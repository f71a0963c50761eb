#include "hrcal/models/gp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "hrcal/errors.hpp"

namespace hrcal::models {

namespace {

constexpr double kLogLsMin = -6.907755278982137;  // log 1e-3
constexpr double kLogLsMax = 11.512925464970229;  // log 1e5

Eigen::MatrixXd gram(const Eigen::MatrixXd& X, std::span<const double> ls, double alpha) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = 1.0 + alpha;
        for (Eigen::Index j = 0; j < i; ++j) {
            double s = 0.0;
            for (Eigen::Index d = 0; d < X.cols(); ++d) {
                const double t = (X(i, d) - X(j, d)) / ls[static_cast<std::size_t>(d)];
                s += t * t;
            }
            K(i, j) = K(j, i) = std::exp(-0.5 * s);
        }
    }
    return K;
}

Eigen::MatrixXd cholesky(const Eigen::MatrixXd& K, double alpha) {
    Eigen::LLT<Eigen::MatrixXd> llt(K);
    if (llt.info() != Eigen::Success) {
        std::ostringstream msg;
        msg << "K + alpha*I is not positive definite (alpha=" << alpha << "); increase alpha";
        throw NotPositiveDefiniteError(msg.str());
    }
    return llt.matrixL();
}

}  // namespace

double ard_rbf(std::span<const double> a, std::span<const double> b, std::span<const double> ls) {
    if (a.size() != b.size() || a.size() != ls.size()) throw ShapeError("ard_rbf dimension mismatch");
    double s = 0.0;
    for (std::size_t d = 0; d < a.size(); ++d) {
        const double t = (a[d] - b[d]) / ls[d];
        s += t * t;
    }
    return std::exp(-0.5 * s);
}

double gp_log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::span<const double> ls,
                                  double alpha, std::vector<double>* gradient) {
    const Eigen::Index n = X.rows();
    const Eigen::MatrixXd K = gram(X, ls, alpha);
    const Eigen::MatrixXd L = cholesky(K, alpha);
    const auto tri = L.triangularView<Eigen::Lower>();
    const auto triT = L.transpose().triangularView<Eigen::Upper>();
    const Eigen::VectorXd a = triT.solve(tri.solve(y));
    const double lml = -0.5 * y.dot(a) - L.diagonal().array().log().sum() -
                       0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (gradient) {
        Eigen::MatrixXd Kinv = tri.solve(Eigen::MatrixXd::Identity(n, n));
        Kinv = triT.solve(Kinv);
        const Eigen::MatrixXd W = a * a.transpose() - Kinv;
        gradient->assign(static_cast<std::size_t>(X.cols()), 0.0);
        for (Eigen::Index d = 0; d < X.cols(); ++d) {
            const double l2 = ls[static_cast<std::size_t>(d)] * ls[static_cast<std::size_t>(d)];
            double g = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < i; ++j) {
                    const double diff = X(i, d) - X(j, d);
                    g += W(i, j) * (K(i, j) * diff * diff / l2);
                }
            (*gradient)[static_cast<std::size_t>(d)] = g;  // symmetric pairs: 2 * 1/2
        }
    }
    return lml;
}

GpPrediction GpModel::predict(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != X.cols()) throw ShapeError("GP input dimension mismatch");
    const Eigen::Index n = X.rows();
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd xi = X.row(i).transpose();
        k[i] = ard_rbf({xi.data(), static_cast<std::size_t>(xi.size())}, x, length_scales);
    }
    const Eigen::VectorXd v = chol_lower.triangularView<Eigen::Lower>().solve(k);
    const double var = std::max(0.0, 1.0 - v.squaredNorm());
    return {y_mean + y_scale * k.dot(weights), var * y_scale * y_scale};
}

GpModel gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpParams& params) {
    const Eigen::Index n = X.rows();
    const auto d = static_cast<std::size_t>(X.cols());
    if (n < 1) throw InsufficientDataError("gp_fit: no rows");
    if (y.size() != n) throw ShapeError("gp_fit: X and y row counts differ");
    if (!(params.alpha > 0.0)) throw ConfigError("GP alpha must be positive");

    GpModel model;
    model.X = X;
    model.alpha = params.alpha;
    if (params.normalize_y) {
        model.y_mean = y.mean();
        const double sd = n > 1 ? std::sqrt((y.array() - model.y_mean).square().sum() / static_cast<double>(n)) : 0.0;
        model.y_scale = sd > 0.0 ? sd : 1.0;
    }
    const Eigen::VectorXd ys = (y.array() - model.y_mean) / model.y_scale;

    std::vector<double> ls = params.length_scales;
    if (ls.empty()) ls.assign(d, 1.0);
    if (ls.size() != d) throw ShapeError("gp_fit: length scale count differs from column count");

    if (params.optimize && n > 1 && d > 0) {
        std::mt19937_64 rng(params.seed);
        Eigen::MatrixXd Xo = X;
        Eigen::VectorXd yo = ys;
        if (n > params.max_opt_rows) {
            std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
            std::iota(idx.begin(), idx.end(), 0);
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(static_cast<std::size_t>(params.max_opt_rows));
            std::sort(idx.begin(), idx.end());
            Xo = X(idx, Eigen::all);
            yo = ys(idx);
        }
        std::uniform_real_distribution<double> start(std::log(0.1), std::log(10.0));
        double best_lml = -std::numeric_limits<double>::infinity();
        std::vector<double> best_theta;
        for (int r = 0; r < std::max(1, params.restarts); ++r) {
            std::vector<double> theta(d);
            for (std::size_t k = 0; k < d; ++k) theta[k] = r == 0 ? std::log(ls[k]) : start(rng);
            auto scales = [&](const std::vector<double>& th) {
                std::vector<double> s(d);
                for (std::size_t k = 0; k < d; ++k) s[k] = std::exp(th[k]);
                return s;
            };
            std::vector<double> grad;
            double lml;
            try {
                lml = gp_log_marginal_likelihood(Xo, yo, scales(theta), params.alpha, &grad);
            } catch (const NotPositiveDefiniteError&) {
                continue;
            }
            std::vector<double> trace{lml};
            double step = 0.1;
            for (int it = 0; it < params.max_iter; ++it) {
                double gnorm = 0.0;
                for (double g : grad) gnorm += g * g;
                gnorm = std::sqrt(gnorm);
                if (gnorm < 1e-6) break;
                bool accepted = false;
                while (step > 1e-8) {
                    std::vector<double> cand(d);
                    for (std::size_t k = 0; k < d; ++k)
                        cand[k] = std::clamp(theta[k] + step * grad[k] / gnorm, kLogLsMin, kLogLsMax);
                    std::vector<double> cgrad;
                    double clml = -std::numeric_limits<double>::infinity();
                    try {
                        clml = gp_log_marginal_likelihood(Xo, yo, scales(cand), params.alpha, &cgrad);
                    } catch (const NotPositiveDefiniteError&) {
                    }
                    if (clml > lml) {
                        theta = std::move(cand);
                        grad = std::move(cgrad);
                        lml = clml;
                        trace.push_back(lml);
                        step *= 1.5;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if (!accepted) break;
                if (trace.size() > 1 && trace.back() - trace[trace.size() - 2] < 1e-9 * std::abs(lml)) break;
            }
            if (lml > best_lml) {
                best_lml = lml;
                best_theta = theta;
                model.lml_trace = std::move(trace);
            }
        }
        if (!best_theta.empty())
            for (std::size_t k = 0; k < d; ++k) ls[k] = std::exp(best_theta[k]);
    }

    model.length_scales = ls;
    const Eigen::MatrixXd K = gram(X, ls, params.alpha);
    model.chol_lower = cholesky(K, params.alpha);
    model.weights = model.chol_lower.transpose().triangularView<Eigen::Upper>().solve(
        model.chol_lower.triangularView<Eigen::Lower>().solve(ys));
    model.log_marginal_likelihood = -0.5 * ys.dot(model.weights) - model.chol_lower.diagonal().array().log().sum() -
                                    0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    return model;
}

}  // namespace hrcal::models
