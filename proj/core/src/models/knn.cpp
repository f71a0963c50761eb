#include "hrcal/models/knn.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "hrcal/errors.hpp"

namespace hrcal::models {

namespace {

// Sum of |a_i - b_i|^p; monotone in the Minkowski distance.
double powered(const double* a, const double* b, std::size_t d, int p) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double t = std::abs(a[i] - b[i]);
        s += p == 1 ? t : (p == 2 ? t * t : std::pow(t, p));
    }
    return s;
}

}  // namespace

double minkowski(std::span<const double> a, std::span<const double> b, int p) {
    if (a.size() != b.size()) throw ShapeError("minkowski dimension mismatch");
    if (p < 1) throw ConfigError("Minkowski order must be >= 1");
    const double s = powered(a.data(), b.data(), a.size(), p);
    return p == 1 ? s : std::pow(s, 1.0 / p);
}

KnnModel knn_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KnnParams& params) {
    if (y.size() != X.rows()) throw ShapeError("knn_fit: X and y row counts differ");
    if (params.n_neighbors < 1) throw ConfigError("kNN needs k >= 1");
    if (params.n_neighbors > X.rows())
        throw ConfigError("kNN k=" + std::to_string(params.n_neighbors) + " exceeds training rows " +
                          std::to_string(X.rows()));
    if (params.p < 1) throw ConfigError("Minkowski order must be >= 1");
    // Row-contiguous storage for the distance scan.
    return {X.transpose(), y, params};
}

std::vector<Eigen::Index> KnnModel::neighbors(std::span<const double> x) const {
    const auto d = static_cast<std::size_t>(X.rows());
    if (x.size() != d) throw ShapeError("kNN input dimension mismatch");
    const Eigen::Index n = X.cols();
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) dist[static_cast<std::size_t>(i)] = {powered(X.col(i).data(), x.data(), d, params.p), i};
    const auto k = static_cast<std::size_t>(params.n_neighbors);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<Eigen::Index> out(k);
    for (std::size_t i = 0; i < k; ++i) out[i] = dist[i].second;
    return out;
}

double KnnModel::predict(std::span<const double> x) const {
    double s = 0.0;
    const auto nb = neighbors(x);
    for (auto i : nb) s += y[i];
    return s / static_cast<double>(nb.size());
}

}  // namespace hrcal::models
