#include "hrcal/models/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hrcal/errors.hpp"

namespace hrcal::models {

double MlpNet::forward(std::span<const double> x) const {
    if (layers.empty() || static_cast<Eigen::Index>(x.size()) != layers.front().W.cols())
        throw ShapeError("MLP input dimension mismatch");
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
    for (std::size_t l = 0; l < layers.size(); ++l) {
        a = layers[l].W * a + layers[l].b;
        if (l + 1 < layers.size()) a = a.cwiseMax(0.0);
    }
    return a[0];
}

std::size_t MlpNet::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.W.size() + l.b.size());
    return n;
}

std::vector<double> MlpNet::flatten() const {
    std::vector<double> theta;
    theta.reserve(parameter_count());
    for (const auto& l : layers) {
        for (Eigen::Index r = 0; r < l.W.rows(); ++r)
            for (Eigen::Index c = 0; c < l.W.cols(); ++c) theta.push_back(l.W(r, c));
        for (Eigen::Index r = 0; r < l.b.size(); ++r) theta.push_back(l.b[r]);
    }
    return theta;
}

void MlpNet::unflatten(std::span<const double> theta) {
    if (theta.size() != parameter_count()) throw ShapeError("MLP parameter vector has the wrong length");
    std::size_t k = 0;
    for (auto& l : layers) {
        for (Eigen::Index r = 0; r < l.W.rows(); ++r)
            for (Eigen::Index c = 0; c < l.W.cols(); ++c) l.W(r, c) = theta[k++];
        for (Eigen::Index r = 0; r < l.b.size(); ++r) l.b[r] = theta[k++];
    }
}

MlpNet mlp_init(int n_inputs, const std::vector<int>& hidden, bool zero_init_output, std::uint64_t seed) {
    if (n_inputs < 1) throw ConfigError("MLP needs at least one input");
    for (int h : hidden)
        if (h < 1) throw ConfigError("MLP hidden layer sizes must be positive");
    std::mt19937_64 rng(seed);
    MlpNet net;
    int in = n_inputs;
    std::vector<int> sizes = hidden;
    sizes.push_back(1);
    for (std::size_t i = 0; i < sizes.size(); ++i) {
        const int out = sizes[i];
        // Glorot uniform.
        const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
        std::uniform_real_distribution<double> u(-bound, bound);
        DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
        const bool zero = zero_init_output && i + 1 == sizes.size();
        for (Eigen::Index r = 0; r < out; ++r)
            for (Eigen::Index c = 0; c < in; ++c) layer.W(r, c) = zero ? 0.0 : u(rng);
        if (!zero)
            for (Eigen::Index r = 0; r < out; ++r) layer.b[r] = u(rng) * 0.1;
        net.layers.push_back(std::move(layer));
        in = out;
    }
    return net;
}

double mlp_loss_and_gradient(const MlpNet& net, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             std::vector<double>* gradient) {
    const Eigen::Index n = X.rows();
    if (n == 0) throw InsufficientDataError("MLP loss on an empty batch");
    const std::size_t L = net.layers.size();
    // Activations stored column-per-sample.
    std::vector<Eigen::MatrixXd> act(L + 1);
    act[0] = X.transpose();
    for (std::size_t l = 0; l < L; ++l) {
        Eigen::MatrixXd z = net.layers[l].W * act[l];
        z.colwise() += net.layers[l].b;
        act[l + 1] = l + 1 < L ? z.cwiseMax(0.0) : z;
    }
    const Eigen::RowVectorXd resid = act[L].row(0) - y.transpose();
    const double loss = 0.5 * resid.squaredNorm() / static_cast<double>(n);
    if (!gradient) return loss;

    std::vector<Eigen::MatrixXd> dW(L);
    std::vector<Eigen::VectorXd> db(L);
    Eigen::MatrixXd delta = resid / static_cast<double>(n);
    for (std::size_t l = L; l-- > 0;) {
        dW[l] = delta * act[l].transpose();
        db[l] = delta.rowwise().sum();
        if (l > 0) {
            delta = net.layers[l].W.transpose() * delta;
            delta = delta.cwiseProduct((act[l].array() > 0.0).cast<double>().matrix());
        }
    }
    gradient->clear();
    gradient->reserve(net.parameter_count());
    for (std::size_t l = 0; l < L; ++l) {
        for (Eigen::Index r = 0; r < dW[l].rows(); ++r)
            for (Eigen::Index c = 0; c < dW[l].cols(); ++c) gradient->push_back(dW[l](r, c));
        for (Eigen::Index r = 0; r < db[l].size(); ++r) gradient->push_back(db[l][r]);
    }
    return loss;
}

MlpModel mlp_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const MlpParams& params) {
    const Eigen::Index n = X.rows();
    if (n < 1) throw InsufficientDataError("mlp_fit: no rows");
    if (y.size() != n) throw ShapeError("mlp_fit: X and y row counts differ");
    if (!(params.learning_rate > 0.0) || params.epochs < 1 || params.batch_size < 1)
        throw ConfigError("MLP learning rate, epochs and batch size must be positive");

    MlpModel model;
    model.y_mean = y.mean();
    const double sd = std::sqrt((y.array() - model.y_mean).square().sum() / static_cast<double>(n));
    model.y_scale = sd > 0.0 ? sd : 1.0;
    const Eigen::VectorXd ys = (y.array() - model.y_mean) / model.y_scale;

    std::mt19937_64 rng(params.seed);
    model.net = mlp_init(static_cast<int>(X.cols()), params.hidden, params.zero_init_output, rng());

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    auto n_val = static_cast<Eigen::Index>(std::floor(params.validation_fraction * static_cast<double>(n)));
    if (n - n_val < 2) n_val = 0;
    std::vector<Eigen::Index> val(order.begin(), order.begin() + n_val);
    std::vector<Eigen::Index> train(order.begin() + n_val, order.end());
    const Eigen::MatrixXd Xv = X(val, Eigen::all);
    const Eigen::VectorXd yv = ys(val);

    auto monitor = [&](const MlpNet& net) {
        const Eigen::MatrixXd& Xm = n_val > 0 ? Xv : X;
        const Eigen::VectorXd& ym = n_val > 0 ? yv : ys;
        double s = 0.0;
        for (Eigen::Index i = 0; i < Xm.rows(); ++i) {
            const Eigen::VectorXd xi = Xm.row(i).transpose();
            s += std::abs(net.forward({xi.data(), static_cast<std::size_t>(xi.size())}) - ym[i]);
        }
        return s / static_cast<double>(Xm.rows());
    };

    std::vector<double> theta = model.net.flatten();
    std::vector<double> m(theta.size(), 0.0), v(theta.size(), 0.0), grad;
    std::vector<double> best_theta = theta;
    double best = monitor(model.net);
    int since_best = 0;
    long step = 0;
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        std::shuffle(train.begin(), train.end(), rng);
        for (std::size_t start = 0; start < train.size(); start += static_cast<std::size_t>(params.batch_size)) {
            const std::size_t stop = std::min(train.size(), start + static_cast<std::size_t>(params.batch_size));
            std::vector<Eigen::Index> idx(train.begin() + static_cast<std::ptrdiff_t>(start),
                                          train.begin() + static_cast<std::ptrdiff_t>(stop));
            const double loss = mlp_loss_and_gradient(model.net, X(idx, Eigen::all), ys(idx), &grad);
            if (!std::isfinite(loss)) throw TrainingError("MLP loss diverged (NaN or infinite)");
            ++step;
            const double c1 = 1.0 - std::pow(params.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(params.beta2, static_cast<double>(step));
            for (std::size_t k = 0; k < theta.size(); ++k) {
                m[k] = params.beta1 * m[k] + (1.0 - params.beta1) * grad[k];
                v[k] = params.beta2 * v[k] + (1.0 - params.beta2) * grad[k] * grad[k];
                theta[k] -= params.learning_rate * (m[k] / c1) / (std::sqrt(v[k] / c2) + params.adam_eps);
            }
            model.net.unflatten(theta);
        }
        model.epochs_run = epoch + 1;
        const double score = monitor(model.net);
        if (!std::isfinite(score)) throw TrainingError("MLP predictions diverged (NaN or infinite)");
        if (score < best - 1e-12) {
            best = score;
            best_theta = theta;
            since_best = 0;
        } else if (++since_best >= params.patience) {
            break;
        }
    }
    model.net.unflatten(best_theta);
    model.best_validation_mae = best * model.y_scale;
    return model;
}

}  // namespace hrcal::models
