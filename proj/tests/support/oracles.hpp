#pragma once

// Independent reference implementations used by the unit and acceptance
// tests. None of these share code with hrcal_core beyond plain data types.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hrcal/models/mlp.hpp"

namespace hrcal::oracle {

struct SvrQpSolution {
    Eigen::VectorXd alpha;
    Eigen::VectorXd alpha_star;
    double objective = 0.0;
    double bias = 0.0;
};

// Epsilon-SVR dual by accelerated projected gradient over the box
// [0, C]^2n intersected with sum(a - a*) = 0. Dense, O(n^2) per step.
SvrQpSolution svr_dual_qp(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double C, double epsilon,
                          int iterations = 200000);

// Dual objective 1/2 b'Kb + eps sum(a + a*) - y'b with b = a - a*.
double svr_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double epsilon,
                     const Eigen::VectorXd& a, const Eigen::VectorXd& as);

// RBF / polynomial Gram matrix written out element by element.
Eigen::MatrixXd rbf_gram(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double gamma);

struct GpMoments {
    double mean;
    double variance;
};

// Posterior of a zero-mean GP with ARD RBF kernel by explicit matrix inverse.
// With normalize the target is standardised (population sd) first.
GpMoments gp_direct(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<double>& ls, double alpha,
                    bool normalize, std::span<const double> x);

// Central differences of mlp_loss_and_gradient's loss in flatten() order.
std::vector<double> mlp_fd_gradient(const models::MlpNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    double h);

// Permutation p-value of the squared correlation: fraction of label shuffles
// (plus the observed one) whose r^2 reaches the observed r^2.
double permutation_p(std::span<const double> x, std::span<const double> y, int draws, std::uint64_t seed);

// |H| of an analog Butterworth prototype mapped through the prewarped
// bilinear transform.
double butter_lowpass_gain(int order, double cutoff_hz, double fs, double f_hz);
double butter_bandpass_gain(int order, double low_hz, double high_hz, double fs, double f_hz);

// Sum over segments of max(0, n - w + 1).
std::size_t expected_window_rows(const std::vector<std::size_t>& segments, int w);

}  // namespace hrcal::oracle
