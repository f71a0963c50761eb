#include "hrcal/models/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hrcal::models {

namespace {

constexpr double kTau = 1e-12;

double eval_rows(const KernelSpec& k, const double* a, const double* b, Eigen::Index d) {
    if (k.kind == KernelSpec::Kind::rbf) {
        double d2 = 0.0;
        for (Eigen::Index i = 0; i < d; ++i) {
            const double t = a[i] - b[i];
            d2 += t * t;
        }
        return std::exp(-k.gamma * d2);
    }
    double dot = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) dot += a[i] * b[i];
    return std::pow(k.gamma * dot + 1.0, k.degree);
}

// Lazily computed kernel columns with least-recently-used eviction.
class KernelColumns {
public:
    KernelColumns(const KernelSpec& spec, const Eigen::MatrixXd& X, double cache_mb)
        : spec_(spec), rows_(X.transpose()), n_(X.rows()) {
        const double bytes = static_cast<double>(n_) * sizeof(double);
        slots_ = static_cast<std::size_t>(std::clamp(cache_mb * 1024.0 * 1024.0 / bytes, 2.0, static_cast<double>(n_)));
        slot_of_.assign(static_cast<std::size_t>(n_), -1);
        data_.resize(slots_);
        owner_.assign(slots_, -1);
        stamp_.assign(slots_, 0);
        diag_.resize(static_cast<std::size_t>(n_));
        for (Eigen::Index i = 0; i < n_; ++i) diag_[static_cast<std::size_t>(i)] = at(i, i);
    }

    double diag(Eigen::Index i) const { return diag_[static_cast<std::size_t>(i)]; }

    const std::vector<double>& column(Eigen::Index i) {
        ++clock_;
        auto& slot = slot_of_[static_cast<std::size_t>(i)];
        if (slot >= 0) {
            stamp_[static_cast<std::size_t>(slot)] = clock_;
            return data_[static_cast<std::size_t>(slot)];
        }
        std::size_t victim = 0;
        for (std::size_t s = 1; s < slots_; ++s)
            if (stamp_[s] < stamp_[victim]) victim = s;
        if (owner_[victim] >= 0) slot_of_[static_cast<std::size_t>(owner_[victim])] = -1;
        auto& col = data_[victim];
        col.resize(static_cast<std::size_t>(n_));
        for (Eigen::Index j = 0; j < n_; ++j) col[static_cast<std::size_t>(j)] = at(i, j);
        owner_[victim] = i;
        stamp_[victim] = clock_;
        slot = static_cast<long>(victim);
        return col;
    }

private:
    double at(Eigen::Index i, Eigen::Index j) const {
        return eval_rows(spec_, rows_.col(i).data(), rows_.col(j).data(), rows_.rows());
    }

    KernelSpec spec_;
    Eigen::MatrixXd rows_;  // column-major copy so each sample is contiguous
    Eigen::Index n_;
    std::size_t slots_;
    std::vector<long> slot_of_;
    std::vector<std::vector<double>> data_;
    std::vector<Eigen::Index> owner_;
    std::vector<unsigned long> stamp_;
    unsigned long clock_ = 0;
    std::vector<double> diag_;
};

}  // namespace

double SvrModel::predict(std::span<const double> x) const {
    if (support.rows() > 0 && static_cast<Eigen::Index>(x.size()) != support.cols())
        throw ShapeError("SVR input dimension mismatch");
    double f = bias;
    for (Eigen::Index i = 0; i < support.rows(); ++i) {
        const Eigen::VectorXd sv = support.row(i).transpose();
        f += coef[i] * eval_rows(kernel, sv.data(), x.data(), support.cols());
    }
    return f;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    const Eigen::MatrixXd rows = X.transpose();
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) K(i, j) = K(j, i) = eval_rows(spec, rows.col(i).data(), rows.col(j).data(), rows.rows());
    return K;
}

double svr_dual_objective(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double epsilon,
                          const Eigen::VectorXd& alpha, const Eigen::VectorXd& alpha_star) {
    const Eigen::VectorXd d = alpha - alpha_star;
    return 0.5 * d.dot(K * d) + epsilon * (alpha.sum() + alpha_star.sum()) - y.dot(d);
}

SvrModel svr_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const SvrParams& params) {
    const Eigen::Index n = X.rows();
    if (n < 2) throw InsufficientDataError("svr_fit needs at least two rows");
    if (y.size() != n) throw ShapeError("svr_fit: X and y row counts differ");
    if (!(params.C > 0.0)) throw ConfigError("SVR C must be positive");
    if (!(params.epsilon >= 0.0)) throw ConfigError("SVR epsilon must be non-negative");
    validate(params.kernel);

    // Variables 0..n-1 are alpha (sign +1), n..2n-1 are alpha* (sign -1).
    const std::size_t l = 2 * static_cast<std::size_t>(n);
    const double C = params.C;
    std::vector<double> beta(l, 0.0), grad(l), p(l);
    std::vector<signed char> sign(l);
    for (std::size_t t = 0; t < l; ++t) {
        const auto i = static_cast<Eigen::Index>(t % static_cast<std::size_t>(n));
        sign[t] = t < static_cast<std::size_t>(n) ? 1 : -1;
        p[t] = t < static_cast<std::size_t>(n) ? params.epsilon - y[i] : params.epsilon + y[i];
        grad[t] = p[t];
    }

    KernelColumns K(params.kernel, X, params.cache_mb);
    auto src = [n](std::size_t t) { return static_cast<Eigen::Index>(t % static_cast<std::size_t>(n)); };
    auto in_up = [&](std::size_t t) { return sign[t] > 0 ? beta[t] < C : beta[t] > 0.0; };
    auto in_low = [&](std::size_t t) { return sign[t] > 0 ? beta[t] > 0.0 : beta[t] < C; };

    long iter = 0;
    bool converged = false;
    while (true) {
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        std::size_t i = l, j = l;
        for (std::size_t t = 0; t < l; ++t) {
            const double v = -sign[t] * grad[t];
            if (in_up(t) && v > gmax) {
                gmax = v;
                i = t;
            }
            if (in_low(t) && v < gmin) {
                gmin = v;
                j = t;
            }
        }
        if (i == l || j == l || gmax - gmin < params.tol) {
            converged = true;
            break;
        }
        if (iter >= params.max_iter) break;
        ++iter;

        const auto& Ki = K.column(src(i));
        const std::vector<double> Ki_copy = Ki;  // the next lookup may evict it
        const auto& Kj = K.column(src(j));
        const double Qii = K.diag(src(i));
        const double Qjj = K.diag(src(j));
        const double Qij = sign[i] * sign[j] * Ki_copy[static_cast<std::size_t>(src(j))];

        const double old_i = beta[i], old_j = beta[j];
        double& ai = beta[i];
        double& aj = beta[j];
        if (sign[i] != sign[j]) {
            double quad = Qii + Qjj + 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = -diff;
            }
            if (diff > 0.0) {
                if (ai > C) {
                    ai = C;
                    aj = C - diff;
                }
            } else if (aj > C) {
                aj = C;
                ai = C + diff;
            }
        } else {
            double quad = Qii + Qjj - 2.0 * Qij;
            if (quad <= 0.0) quad = kTau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > C) {
                if (ai > C) {
                    ai = C;
                    aj = sum - C;
                }
            } else if (aj < 0.0) {
                aj = 0.0;
                ai = sum;
            }
            if (sum > C) {
                if (aj > C) {
                    aj = C;
                    ai = sum - C;
                }
            } else if (ai < 0.0) {
                ai = 0.0;
                aj = sum;
            }
        }

        const double di = beta[i] - old_i;
        const double dj = beta[j] - old_j;
        for (std::size_t t = 0; t < l; ++t) {
            const auto s = static_cast<std::size_t>(src(t));
            grad[t] += sign[t] * (sign[i] * Ki_copy[s] * di + sign[j] * Kj[s] * dj);
        }
    }

    // Bias from the KKT conditions.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int n_free = 0;
    for (std::size_t t = 0; t < l; ++t) {
        const double yg = sign[t] * grad[t];
        if (beta[t] >= C) {
            if (sign[t] < 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else if (beta[t] <= 0.0) {
            if (sign[t] > 0) ub = std::min(ub, yg);
            else lb = std::max(lb, yg);
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);

    SvrModel model;
    model.kernel = params.kernel;
    model.bias = -rho;
    model.iterations = iter;
    model.converged = converged;
    model.alpha.resize(n);
    model.alpha_star.resize(n);
    double obj = 0.0;
    for (std::size_t t = 0; t < l; ++t) obj += beta[t] * (grad[t] + p[t]);
    model.dual_objective = 0.5 * obj;

    std::vector<Eigen::Index> sv;
    for (Eigen::Index i = 0; i < n; ++i) {
        model.alpha[i] = beta[static_cast<std::size_t>(i)];
        model.alpha_star[i] = beta[static_cast<std::size_t>(i + n)];
        if (model.alpha[i] - model.alpha_star[i] != 0.0) sv.push_back(i);
    }
    model.support.resize(static_cast<Eigen::Index>(sv.size()), X.cols());
    model.coef.resize(static_cast<Eigen::Index>(sv.size()));
    for (std::size_t k = 0; k < sv.size(); ++k) {
        model.support.row(static_cast<Eigen::Index>(k)) = X.row(sv[k]);
        model.coef[static_cast<Eigen::Index>(k)] = model.alpha[sv[k]] - model.alpha_star[sv[k]];
    }

    if (!converged)
        throw ConvergenceError("SMO did not reach KKT tolerance within " + std::to_string(params.max_iter) +
                                   " iterations",
                               std::move(model));
    return model;
}

}  // namespace hrcal::models
