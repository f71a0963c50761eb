#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace hrcal::models {

struct MlpParams {
    std::vector<int> hidden{16, 8, 4};
    double learning_rate = 1e-3;
    int epochs = 200;
    int batch_size = 32;
    int patience = 20;              // epochs without validation MAE improvement
    double validation_fraction = 0.1;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    bool zero_init_output = false;
    std::uint64_t seed = 0;
};

struct DenseLayer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;
};

// ReLU hidden layers and a linear scalar output.
struct MlpNet {
    std::vector<DenseLayer> layers;

    double forward(std::span<const double> x) const;
    std::size_t parameter_count() const;
    // Layer by layer: W row-major, then b.
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> theta);
};

MlpNet mlp_init(int n_inputs, const std::vector<int>& hidden, bool zero_init_output, std::uint64_t seed);

// Mean of 1/2 (f(x) - y)^2 over the rows and its gradient in flatten() order.
double mlp_loss_and_gradient(const MlpNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             std::vector<double>* gradient);

struct MlpModel {
    MlpNet net;
    double y_mean = 0.0;
    double y_scale = 1.0;
    int epochs_run = 0;
    double best_validation_mae = 0.0;

    double predict(std::span<const double> x) const { return y_mean + y_scale * net.forward(x); }
};

// Adam on minibatches of the standardised target. The best weights by
// validation MAE are kept. Throws TrainingError when the loss turns NaN.
MlpModel mlp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const MlpParams& params);

}  // namespace hrcal::models
