#include "hrcal/models/forest.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "hrcal/errors.hpp"

namespace hrcal::models {

double RegressionTree::predict(std::span<const double> x) const {
    int at = 0;
    while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
        const auto& n = nodes[static_cast<std::size_t>(at)];
        at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(at)].value;
}

int RegressionTree::depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].feature < 0) continue;
        d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
        d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
        best = std::max(best, d[i] + 1);
    }
    return best;
}

double ForestModel::predict(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != n_features) throw ShapeError("forest input dimension mismatch");
    double s = 0.0;
    for (const auto& t : trees) s += t.predict(x);
    return s / static_cast<double>(trees.size());
}

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
public:
    TreeBuilder(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const RfParams& p, std::uint64_t seed)
        : X_(X), y_(y), p_(p), rng_(seed) {}

    RegressionTree build(std::vector<int> rows) {
        RegressionTree tree;
        nodes_ = &tree.nodes;
        grow(rows, 0);
        return tree;
    }

private:
    int grow(std::vector<int>& rows, int depth) {
        const int id = static_cast<int>(nodes_->size());
        nodes_->push_back({});
        double sum = 0.0;
        for (int r : rows) sum += y_[r];
        (*nodes_)[static_cast<std::size_t>(id)].value = sum / static_cast<double>(rows.size());

        const auto n = static_cast<int>(rows.size());
        if (depth >= p_.max_depth || n < p_.min_samples_split || n < 2 * p_.min_samples_leaf) return id;
        const Split s = best_split(rows);
        if (s.feature < 0) return id;

        std::vector<int> left, right;
        for (int r : rows) (X_(r, s.feature) <= s.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const int l = grow(left, depth + 1);
        const int rr = grow(right, depth + 1);
        auto& node = (*nodes_)[static_cast<std::size_t>(id)];
        node.feature = s.feature;
        node.threshold = s.threshold;
        node.left = l;
        node.right = rr;
        return id;
    }

    Split best_split(const std::vector<int>& rows) {
        const int d = static_cast<int>(X_.cols());
        std::vector<int> feats(static_cast<std::size_t>(d));
        std::iota(feats.begin(), feats.end(), 0);
        const int m = std::clamp(p_.max_features, 1, d);
        // Partial Fisher-Yates draws m distinct candidates.
        for (int i = 0; i < m; ++i) {
            std::uniform_int_distribution<int> pick(i, d - 1);
            std::swap(feats[static_cast<std::size_t>(i)], feats[static_cast<std::size_t>(pick(rng_))]);
        }

        const auto n = rows.size();
        double total = 0.0, total_sq = 0.0;
        for (int r : rows) {
            total += y_[r];
            total_sq += y_[r] * y_[r];
        }
        const double parent_sse = total_sq - total * total / static_cast<double>(n);

        Split best;
        std::vector<std::pair<double, double>> xs(n);
        for (int c = 0; c < m; ++c) {
            const int f = feats[static_cast<std::size_t>(c)];
            for (std::size_t i = 0; i < n; ++i) xs[i] = {X_(rows[i], f), y_[rows[i]]};
            std::sort(xs.begin(), xs.end());
            double ls = 0.0, lsq = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                ls += xs[i].second;
                lsq += xs[i].second * xs[i].second;
                if (xs[i].first == xs[i + 1].first) continue;
                const auto nl = static_cast<double>(i + 1);
                const auto nr = static_cast<double>(n - i - 1);
                if (nl < p_.min_samples_leaf || nr < p_.min_samples_leaf) continue;
                const double rs = total - ls;
                const double rsq = total_sq - lsq;
                const double sse = (lsq - ls * ls / nl) + (rsq - rs * rs / nr);
                const double gain = parent_sse - sse;
                if (gain > best.gain + 1e-12 * std::max(1.0, parent_sse)) {
                    best.gain = gain;
                    best.feature = f;
                    best.threshold = 0.5 * (xs[i].first + xs[i + 1].first);
                }
            }
        }
        return best;
    }

    const Eigen::MatrixXd& X_;
    const Eigen::VectorXd& y_;
    const RfParams& p_;
    std::mt19937_64 rng_;
    std::vector<TreeNode>* nodes_ = nullptr;
};

}  // namespace

RegressionTree grow_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, std::vector<int> rows,
                         const RfParams& params, std::uint64_t seed) {
    if (rows.empty()) throw InsufficientDataError("grow_tree: no rows");
    return TreeBuilder(X, y, params, seed).build(std::move(rows));
}

ForestModel rf_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const RfParams& params) {
    const auto n = static_cast<int>(X.rows());
    if (y.size() != X.rows()) throw ShapeError("rf_fit: X and y row counts differ");
    if (n < 1 || n < params.min_samples_split) throw InsufficientDataError("rf_fit: fewer rows than min_samples_split");
    if (params.n_estimators < 1 || params.max_depth < 1 || params.min_samples_leaf < 1 || params.max_features < 1)
        throw ConfigError("random forest hyperparameters must be positive");

    ForestModel model;
    model.n_features = static_cast<int>(X.cols());
    model.trees.reserve(static_cast<std::size_t>(params.n_estimators));
    std::mt19937_64 master(params.seed);
    for (int t = 0; t < params.n_estimators; ++t) {
        const std::uint64_t tree_seed = master();
        std::mt19937_64 rng(tree_seed);
        std::vector<int> rows(static_cast<std::size_t>(n));
        if (params.bootstrap) {
            std::uniform_int_distribution<int> draw(0, n - 1);
            for (auto& r : rows) r = draw(rng);
        } else {
            std::iota(rows.begin(), rows.end(), 0);
        }
        model.trees.push_back(grow_tree(X, y, std::move(rows), params, rng()));
    }
    return model;
}

}  // namespace hrcal::models
