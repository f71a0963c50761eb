#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hrcal::models {

struct RfParams {
    int max_features = 1;        // candidate features drawn per split (capped at the column count)
    int n_estimators = 200;
    int max_depth = 10;
    int min_samples_split = 2;
    int min_samples_leaf = 2;
    bool bootstrap = true;
    std::uint64_t seed = 0;
};

// Flat CART regression tree. Leaves have feature == -1.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct RegressionTree {
    std::vector<TreeNode> nodes;
    double predict(std::span<const double> x) const;
    int depth() const;
};

struct ForestModel {
    std::vector<RegressionTree> trees;
    int n_features = 0;
    double predict(std::span<const double> x) const;
};

// Grows one tree on the given row indices (duplicates allowed). Splits are
// searched over midpoints of sorted unique values of `max_features`
// randomly drawn columns, maximising the reduction in summed squared error.
RegressionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<int> rows,
                         const RfParams& params, std::uint64_t seed);

ForestModel rf_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const RfParams& params);

}  // namespace hrcal::models
