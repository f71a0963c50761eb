#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hrcal::models {

struct KnnParams {
    int n_neighbors = 10;
    int p = 2;  // Minkowski order
};

struct KnnModel {
    Eigen::MatrixXd X;  // d x n, one training sample per column
    Eigen::VectorXd y;
    KnnParams params;

    // Training-row indices of the k nearest points, nearest first; equal
    // distances are ordered by row index.
    std::vector<Eigen::Index> neighbors(std::span<const double> x) const;
    double predict(std::span<const double> x) const;
};

// Throws ConfigError when k > n or p < 1.
KnnModel knn_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KnnParams& params);

double minkowski(std::span<const double> a, std::span<const double> b, int p);

}  // namespace hrcal::models
