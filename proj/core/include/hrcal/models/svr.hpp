#pragma once

#include <span>

#include <Eigen/Dense>

#include "hrcal/errors.hpp"
#include "hrcal/models/kernel.hpp"

namespace hrcal::models {

struct SvrParams {
    double C = 1.0;
    double epsilon = 0.1;
    KernelSpec kernel;
    double tol = 1e-3;            // stop when the maximal KKT violation drops below this
    long max_iter = 100000;
    double cache_mb = 256.0;      // kernel column cache budget
};

struct SvrModel {
    KernelSpec kernel;
    Eigen::MatrixXd support;      // one support vector per row
    Eigen::VectorXd coef;         // alpha_i - alpha_i^* for each support vector
    double bias = 0.0;
    // Full dual solution over the training rows, kept for diagnostics.
    Eigen::VectorXd alpha;
    Eigen::VectorXd alpha_star;
    double dual_objective = 0.0;  // 1/2 b'Qb + p'b at termination (minimisation form)
    long iterations = 0;
    bool converged = false;

    double predict(std::span<const double> x) const;
};

// SMO hit max_iter before the KKT violation fell below tol.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, SvrModel best) : Error(what), best_iterate(std::move(best)) {}
    SvrModel best_iterate;
};

// Epsilon-insensitive SVR dual
//   min 1/2 (a - a*)' K (a - a*) + eps * sum(a + a*) - y'(a - a*)
//   s.t. sum(a - a*) = 0, 0 <= a, a* <= C
// solved by SMO with maximal-violating-pair working-set selection. The bias
// is the average over free support vectors (midpoint of the feasible range
// when none are free).
SvrModel svr_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& params);

// Dual objective of an arbitrary (a, a*) in the same minimisation form.
double svr_dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double epsilon,
                          const Eigen::VectorXd& alpha, const Eigen::VectorXd& alpha_star);

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X);

}  // namespace hrcal::models
