#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hrcal/features.hpp"
#include "hrcal/models/forest.hpp"
#include "hrcal/models/gp.hpp"
#include "hrcal/models/knn.hpp"
#include "hrcal/models/mlp.hpp"
#include "hrcal/models/sigmoid_lr.hpp"
#include "hrcal/models/svr.hpp"

namespace hrcal::models {

enum class Algorithm { svr, rf, gp, mlp, sigmoid_lr, knn };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(std::string_view s);

using ModelParams = std::variant<SvrParams, RfParams, GpParams, MlpParams, SigmoidLrParams, KnnParams>;

struct ModelSpec {
    ModelParams params;

    Algorithm algorithm() const { return static_cast<Algorithm>(params.index()); }
    // Stable human-readable id, e.g. "svr(kernel=rbf,C=1,epsilon=0.1,gamma=0.1)".
    std::string label() const;
};

// Hyperparameter axes of the tuning grid. Defaults are the full value
// lists; any axis can be overridden with positive values.
struct GridAxes {
    std::vector<double> svr_C{0.001, 0.01, 0.1, 1, 10, 100};
    std::vector<double> svr_epsilon{0.001, 0.01, 0.1, 1, 10, 100};
    std::vector<double> svr_gamma{0.001, 0.01, 0.1, 1, 10, 100};
    std::vector<std::string> svr_kernel{"rbf", "poly"};
    std::vector<int> svr_degree{2, 3, 4, 5};

    std::vector<int> rf_max_features{1, 2, 3};
    std::vector<int> rf_n_estimators = range(200, 2000, 4);
    std::vector<int> rf_max_depth = range(10, 49, 3);
    std::vector<int> rf_min_samples_split = range(2, 14, 3);
    std::vector<int> rf_min_samples_leaf = range(2, 14, 3);

    std::vector<double> gp_alpha{1e-10, 1e-7, 1e-5, 1e-3, 1e-1, 1};

    std::vector<std::vector<int>> mlp_hidden{{16, 8, 2}, {16, 8, 4}, {8, 4, 2}, {16, 8, 4, 2},
                                             {8, 4, 4, 2}, {16, 8, 4, 4, 2}, {32, 16, 8, 4, 2}};
    std::vector<double> mlp_learning_rate{0.01, 0.001, 0.0001};

    std::vector<double> lr_C{0.001, 0.01, 0.1, 1, 10, 100};
    std::vector<std::string> lr_penalty{"l1", "l2", "elasticnet"};

    std::vector<int> knn_k{10, 20, 30, 40, 50, 100, 150, 200, 500, 1000};
    std::vector<int> knn_p{1, 2, 3};

    // Inclusive integer range lo, lo + step, ... <= hi.
    static std::vector<int> range(int lo, int hi, int step);
};

// Cartesian product of the axes for one algorithm, in a fixed nesting order
// (first axis outermost). Poly SVR specs carry every degree; RBF ignores it.
std::vector<ModelSpec> expand_grid(Algorithm a, const GridAxes& axes = {});
std::size_t grid_size(Algorithm a, const GridAxes& axes = {});

struct FitOptions {
    int fold_id = -1;
    std::uint64_t seed = 0;
    // Predictions on the training rows outside this band raise the guardband flag.
    double guard_low = -30.0;
    double guard_high = 300.0;
};

using FittedModel = std::variant<SvrModel, ForestModel, GpModel, MlpModel, SigmoidLrModel, KnnModel>;

// A fitted regressor bundled with its feature names and scaler. Immutable
// after fit; predict is reentrant.
class TrainedModel {
public:
    // Standardises `train` with its own statistics and fits the spec.
    static TrainedModel fit(const ModelSpec& spec, const features::FeatureMatrix& train, const FitOptions& opts = {});

    const ModelSpec& spec() const noexcept { return spec_; }
    Algorithm algorithm() const { return spec_.algorithm(); }
    const std::vector<std::string>& feature_names() const noexcept { return scaler_.columns; }
    const features::ScalerStats& scaler() const noexcept { return scaler_; }
    const FittedModel& fitted() const noexcept { return fitted_; }
    int fold_id() const noexcept { return fold_id_; }
    std::uint64_t seed() const noexcept { return seed_; }
    bool guardband_flag() const noexcept { return guardband_; }
    bool converged() const noexcept { return converged_; }

    // Unscaled feature row in feature_names() order.
    double predict_row(std::span<const double> raw) const;
    // Column names must equal feature_names() exactly (ShapeError otherwise).
    std::vector<double> predict(const features::FeatureMatrix& m) const;

    // Versioned text format; see README.
    std::string serialize() const;
    static TrainedModel deserialize(std::string_view text);

private:
    ModelSpec spec_;
    features::ScalerStats scaler_;
    FittedModel fitted_;
    int fold_id_ = -1;
    std::uint64_t seed_ = 0;
    bool guardband_ = false;
    bool converged_ = true;
};

// Fits the bare estimator on an already scaled design matrix.
FittedModel fit_estimator(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          std::uint64_t seed, bool* converged = nullptr);
double predict_estimator(const FittedModel& m, std::span<const double> x);

}  // namespace hrcal::models
