#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>

namespace hrcal::models {

enum class Penalty { l1, l2, elasticnet };

std::string to_string(Penalty p);
Penalty parse_penalty(const std::string& s);

struct SigmoidLrParams {
    double C = 1.0;
    Penalty penalty = Penalty::l2;
    double l1_ratio = 0.5;   // elasticnet mixing
    int max_iter = 5000;
    double tol = 1e-9;       // relative objective change
};

// Min-max map of the training target range onto [0.05, 0.95].
struct TargetMap {
    double lo = 0.0;
    double hi = 1.0;

    static constexpr double kLow = 0.05;
    static constexpr double kHigh = 0.95;

    double forward(double y) const { return kLow + (kHigh - kLow) * (y - lo) / (hi - lo); }
    double inverse(double t) const { return lo + (t - kLow) / (kHigh - kLow) * (hi - lo); }
};

// Throws DegenerateTargetError when max(y) == min(y).
TargetMap make_target_map(std::span<const double> y);

struct SigmoidLrModel {
    Eigen::VectorXd w;
    double b = 0.0;
    TargetMap map;
    bool constant = false;   // training target had no spread
    double constant_value = 0.0;
    int iterations = 0;

    double predict(std::span<const double> x) const;
};

// Minimises 1/2 sum (sigmoid(w'x + b) - t)^2 + (1/C) P(w) by proximal
// gradient descent with backtracking, where t is the mapped target and
// P is |w|_1, 1/2 |w|^2 or r |w|_1 + (1 - r)/2 |w|^2. The bias is not
// penalised. A constant target yields a constant model.
SigmoidLrModel sigmoid_lr_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SigmoidLrParams& params);

}  // namespace hrcal::models
