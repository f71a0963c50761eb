#include "hrcal/models/sigmoid_lr.hpp"

#include <algorithm>
#include <cmath>

#include "hrcal/errors.hpp"

namespace hrcal::models {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double soft_threshold(double v, double t) { return v > t ? v - t : (v < -t ? v + t : 0.0); }

}  // namespace

std::string to_string(Penalty p) {
    switch (p) {
        case Penalty::l1: return "l1";
        case Penalty::l2: return "l2";
        case Penalty::elasticnet: return "elasticnet";
    }
    return "l2";
}

Penalty parse_penalty(const std::string& s) {
    if (s == "l1") return Penalty::l1;
    if (s == "l2") return Penalty::l2;
    if (s == "elasticnet") return Penalty::elasticnet;
    throw ConfigError("unknown penalty '" + s + "'");
}

TargetMap make_target_map(std::span<const double> y) {
    if (y.empty()) throw InsufficientDataError("target map of an empty target");
    const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
    if (!(*mx > *mn)) throw DegenerateTargetError("target range is zero; sigmoid output scaling undefined");
    return {*mn, *mx};
}

double SigmoidLrModel::predict(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != w.size()) throw ShapeError("sigmoid LR input dimension mismatch");
    if (constant) return constant_value;
    const double z = Eigen::Map<const Eigen::VectorXd>(x.data(), w.size()).dot(w) + b;
    return map.inverse(sigmoid(z));
}

SigmoidLrModel sigmoid_lr_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SigmoidLrParams& params) {
    const Eigen::Index n = X.rows(), d = X.cols();
    if (n < 1) throw InsufficientDataError("sigmoid_lr_fit: no rows");
    if (y.size() != n) throw ShapeError("sigmoid_lr_fit: X and y row counts differ");
    if (!(params.C > 0.0)) throw ConfigError("sigmoid LR C must be positive");
    if (params.l1_ratio < 0.0 || params.l1_ratio > 1.0) throw ConfigError("l1_ratio must lie in [0, 1]");

    SigmoidLrModel model;
    model.w = Eigen::VectorXd::Zero(d);
    try {
        model.map = make_target_map({y.data(), static_cast<std::size_t>(n)});
    } catch (const DegenerateTargetError&) {
        model.constant = true;
        model.constant_value = y[0];
        return model;
    }

    Eigen::VectorXd t(n);
    for (Eigen::Index i = 0; i < n; ++i) t[i] = model.map.forward(y[i]);

    const double lam = 1.0 / params.C;
    double l1 = 0.0, l2 = 0.0;
    switch (params.penalty) {
        case Penalty::l1: l1 = lam; break;
        case Penalty::l2: l2 = lam; break;
        case Penalty::elasticnet:
            l1 = lam * params.l1_ratio;
            l2 = lam * (1.0 - params.l1_ratio);
            break;
    }

    // Smooth part: squared loss plus the l2 term; l1 handled by the prox.
    auto smooth = [&](const Eigen::VectorXd& w, double b, Eigen::VectorXd* gw, double* gb) {
        const Eigen::ArrayXd s = ((X * w).array() + b).unaryExpr([](double z) { return sigmoid(z); });
        const Eigen::ArrayXd r = s - t.array();
        if (gw) {
            const Eigen::VectorXd g = (r * s * (1.0 - s)).matrix();
            *gw = X.transpose() * g + l2 * w;
            *gb = g.sum();
        }
        return 0.5 * r.square().sum() + 0.5 * l2 * w.squaredNorm();
    };
    auto objective = [&](const Eigen::VectorXd& w, double b) { return smooth(w, b, nullptr, nullptr) + l1 * w.lpNorm<1>(); };

    const double tm = t.mean();
    model.b = std::log(tm / (1.0 - tm));
    double step = 1.0;
    double obj = objective(model.w, model.b);
    Eigen::VectorXd gw;
    double gb = 0.0;
    for (int it = 0; it < params.max_iter; ++it) {
        model.iterations = it + 1;
        const double f = smooth(model.w, model.b, &gw, &gb);
        Eigen::VectorXd wn;
        double bn = 0.0, fn = 0.0;
        while (true) {
            wn = model.w - step * gw;
            for (Eigen::Index k = 0; k < d; ++k) wn[k] = soft_threshold(wn[k], step * l1);
            bn = model.b - step * gb;
            fn = smooth(wn, bn, nullptr, nullptr);
            const Eigen::VectorXd dw = wn - model.w;
            const double db = bn - model.b;
            const double quad = f + gw.dot(dw) + gb * db + (dw.squaredNorm() + db * db) / (2.0 * step);
            if (fn <= quad + 1e-15 || step < 1e-20) break;
            step *= 0.5;
        }
        model.w = wn;
        model.b = bn;
        const double next = fn + l1 * model.w.lpNorm<1>();
        const bool done = std::abs(obj - next) <= params.tol * std::max(1.0, std::abs(obj));
        obj = next;
        if (done) break;
        step *= 2.0;
    }
    return model;
}

}  // namespace hrcal::models
