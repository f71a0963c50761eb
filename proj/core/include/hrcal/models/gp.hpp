#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hrcal::models {

struct GpParams {
    double alpha = 1e-10;       // added to the kernel diagonal
    bool optimize = true;       // learn per-feature length scales
    int restarts = 3;
    int max_iter = 50;          // accepted ascent steps per restart
    int max_opt_rows = 256;     // length scales are learned on a deterministic subsample of this size
    bool normalize_y = true;    // standardise the target before fitting
    std::vector<double> length_scales;  // initial (or fixed) values; empty means all 1
    std::uint64_t seed = 0;
};

// k(a, b) = exp(-1/2 * sum_d (a_d - b_d)^2 / l_d^2), unit signal variance.
double ard_rbf(std::span<const double> a, std::span<const double> b, std::span<const double> length_scales);

struct GpPrediction {
    double mean;
    double variance;  // latent-function variance in target units
};

struct GpModel {
    Eigen::MatrixXd X;
    Eigen::VectorXd weights;     // (K + alpha I)^-1 (y - y_mean) / y_scale
    Eigen::MatrixXd chol_lower;  // L with L L' = K + alpha I
    std::vector<double> length_scales;
    double alpha = 0.0;
    double y_mean = 0.0;
    double y_scale = 1.0;
    double log_marginal_likelihood = 0.0;
    std::vector<double> lml_trace;  // one entry per accepted step of the winning restart

    GpPrediction predict(std::span<const double> x) const;
    double prior_variance() const { return y_scale * y_scale; }
};

// Log marginal likelihood of standardised targets and its gradient with
// respect to log length scales. Throws NotPositiveDefiniteError.
double gp_log_marginal_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  std::span<const double> length_scales, double alpha,
                                  std::vector<double>* gradient = nullptr);

GpModel gp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GpParams& params);

}  // namespace hrcal::models
