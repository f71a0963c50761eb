#include "hrcal/models/model.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "hrcal/errors.hpp"
#include "hrcal/io.hpp"

namespace hrcal::models {

namespace {

constexpr std::string_view kMagic = "hrcal-model";
constexpr int kFormatVersion = 1;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string exact(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string join_ints(const std::vector<int>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += sep;
        s += std::to_string(v[i]);
    }
    return s;
}

// Whitespace-separated token writer and reader for the model format.
class Out {
public:
    Out& key(std::string_view k) {
        if (!first_) os_ << '\n';
        first_ = false;
        os_ << k;
        return *this;
    }
    Out& operator<<(double v) {
        os_ << ' ' << exact(v);
        return *this;
    }
    Out& operator<<(long long v) {
        os_ << ' ' << v;
        return *this;
    }
    Out& operator<<(int v) { return *this << static_cast<long long>(v); }
    Out& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
    Out& operator<<(bool v) { return *this << static_cast<long long>(v ? 1 : 0); }
    Out& word(std::string_view w) {
        os_ << ' ' << w;
        return *this;
    }
    Out& vec(const Eigen::VectorXd& v) {
        *this << static_cast<std::size_t>(v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) *this << v[i];
        return *this;
    }
    Out& mat(const Eigen::MatrixXd& m) {
        *this << static_cast<std::size_t>(m.rows()) << static_cast<std::size_t>(m.cols());
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) *this << m(r, c);
        return *this;
    }
    Out& dvec(const std::vector<double>& v) {
        *this << v.size();
        for (double x : v) *this << x;
        return *this;
    }
    std::string str() const { return os_.str() + "\n"; }

private:
    std::ostringstream os_;
    bool first_ = true;
};

class In {
public:
    explicit In(std::string_view text) : text_(text) {}

    void expect(std::string_view k) {
        const auto w = word();
        if (w != k) fail("expected '" + std::string(k) + "', found '" + std::string(w) + "'");
    }
    std::string_view word() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            if (text_[pos_] == '\n') ++line_;
            ++pos_;
        }
        const std::size_t start = pos_;
        while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("unexpected end of model text");
        return text_.substr(start, pos_ - start);
    }
    double num() {
        const auto w = word();
        double v = 0.0;
        const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
        if (res.ec != std::errc{} || res.ptr != w.data() + w.size()) fail("bad number '" + std::string(w) + "'");
        return v;
    }
    long long integer() {
        const auto w = word();
        long long v = 0;
        const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
        if (res.ec != std::errc{} || res.ptr != w.data() + w.size()) fail("bad integer '" + std::string(w) + "'");
        return v;
    }
    std::size_t count() {
        const long long v = integer();
        if (v < 0 || v > (1LL << 32)) fail("bad element count");
        return static_cast<std::size_t>(v);
    }
    Eigen::VectorXd vec() {
        Eigen::VectorXd v(static_cast<Eigen::Index>(count()));
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = num();
        return v;
    }
    Eigen::MatrixXd mat() {
        const auto r = static_cast<Eigen::Index>(count());
        const auto c = static_cast<Eigen::Index>(count());
        Eigen::MatrixXd m(r, c);
        for (Eigen::Index i = 0; i < r; ++i)
            for (Eigen::Index j = 0; j < c; ++j) m(i, j) = num();
        return m;
    }
    std::vector<double> dvec() {
        std::vector<double> v(count());
        for (auto& x : v) x = num();
        return v;
    }
    [[noreturn]] void fail(const std::string& what) const { throw ParseError("<model>", line_, what); }

private:
    std::string_view text_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
};

Eigen::MatrixXd design(const features::FeatureMatrix& m) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) X(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m.at(r, c);
    return X;
}

void write_spec(Out& o, const ModelSpec& spec) {
    std::visit(overloaded{
                   [&](const SvrParams& p) {
                       o.key("svr") << p.C << p.epsilon;
                       o.word(to_string(p.kernel.kind)) << p.kernel.gamma << p.kernel.degree << p.tol
                                                       << static_cast<long long>(p.max_iter);
                   },
                   [&](const RfParams& p) {
                       o.key("rf") << p.max_features << p.n_estimators << p.max_depth << p.min_samples_split
                                   << p.min_samples_leaf << p.bootstrap;
                       o.word(std::to_string(p.seed));
                   },
                   [&](const GpParams& p) {
                       o.key("gp") << p.alpha << p.optimize << p.restarts << p.max_iter << p.max_opt_rows
                                   << p.normalize_y;
                       o.word(std::to_string(p.seed));
                       o.dvec(p.length_scales);
                   },
                   [&](const MlpParams& p) {
                       o.key("mlp") << p.hidden.size();
                       for (int h : p.hidden) o << h;
                       o << p.learning_rate << p.epochs << p.batch_size << p.patience << p.validation_fraction
                         << p.beta1 << p.beta2 << p.adam_eps << p.zero_init_output;
                       o.word(std::to_string(p.seed));
                   },
                   [&](const SigmoidLrParams& p) {
                       o.key("sigmoid_lr") << p.C;
                       o.word(to_string(p.penalty)) << p.l1_ratio << p.max_iter << p.tol;
                   },
                   [&](const KnnParams& p) { o.key("knn") << p.n_neighbors << p.p; },
               },
               spec.params);
}

ModelSpec read_spec(In& in) {
    const auto alg = parse_algorithm(in.word());
    auto u64 = [&] {
        const auto w = in.word();
        std::uint64_t v = 0;
        const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
        if (res.ec != std::errc{} || res.ptr != w.data() + w.size()) in.fail("bad seed");
        return v;
    };
    switch (alg) {
        case Algorithm::svr: {
            SvrParams p;
            p.C = in.num();
            p.epsilon = in.num();
            const auto kind = in.word();
            p.kernel.kind = kind == "poly" ? KernelSpec::Kind::poly : KernelSpec::Kind::rbf;
            p.kernel.gamma = in.num();
            p.kernel.degree = static_cast<int>(in.integer());
            p.tol = in.num();
            p.max_iter = static_cast<long>(in.integer());
            return {p};
        }
        case Algorithm::rf: {
            RfParams p;
            p.max_features = static_cast<int>(in.integer());
            p.n_estimators = static_cast<int>(in.integer());
            p.max_depth = static_cast<int>(in.integer());
            p.min_samples_split = static_cast<int>(in.integer());
            p.min_samples_leaf = static_cast<int>(in.integer());
            p.bootstrap = in.integer() != 0;
            p.seed = u64();
            return {p};
        }
        case Algorithm::gp: {
            GpParams p;
            p.alpha = in.num();
            p.optimize = in.integer() != 0;
            p.restarts = static_cast<int>(in.integer());
            p.max_iter = static_cast<int>(in.integer());
            p.max_opt_rows = static_cast<int>(in.integer());
            p.normalize_y = in.integer() != 0;
            p.seed = u64();
            p.length_scales = in.dvec();
            return {p};
        }
        case Algorithm::mlp: {
            MlpParams p;
            p.hidden.resize(in.count());
            for (auto& h : p.hidden) h = static_cast<int>(in.integer());
            p.learning_rate = in.num();
            p.epochs = static_cast<int>(in.integer());
            p.batch_size = static_cast<int>(in.integer());
            p.patience = static_cast<int>(in.integer());
            p.validation_fraction = in.num();
            p.beta1 = in.num();
            p.beta2 = in.num();
            p.adam_eps = in.num();
            p.zero_init_output = in.integer() != 0;
            p.seed = u64();
            return {p};
        }
        case Algorithm::sigmoid_lr: {
            SigmoidLrParams p;
            p.C = in.num();
            p.penalty = parse_penalty(std::string(in.word()));
            p.l1_ratio = in.num();
            p.max_iter = static_cast<int>(in.integer());
            p.tol = in.num();
            return {p};
        }
        case Algorithm::knn: {
            KnnParams p;
            p.n_neighbors = static_cast<int>(in.integer());
            p.p = static_cast<int>(in.integer());
            return {p};
        }
    }
    in.fail("unknown algorithm");
}

void write_fitted(Out& o, const FittedModel& f) {
    std::visit(overloaded{
                   [&](const SvrModel& m) {
                       o.key("kernel").word(to_string(m.kernel.kind)) << m.kernel.gamma << m.kernel.degree;
                       o.key("bias") << m.bias;
                       o.key("support").mat(m.support);
                       o.key("coef").vec(m.coef);
                       o.key("converged") << m.converged << static_cast<long long>(m.iterations);
                   },
                   [&](const ForestModel& m) {
                       o.key("trees") << m.trees.size() << m.n_features;
                       for (const auto& t : m.trees) {
                           o.key("tree") << t.nodes.size();
                           for (const auto& n : t.nodes) o << n.feature << n.threshold << n.left << n.right << n.value;
                       }
                   },
                   [&](const GpModel& m) {
                       o.key("train").mat(m.X);
                       o.key("weights").vec(m.weights);
                       o.key("chol").mat(m.chol_lower);
                       o.key("length_scales").dvec(m.length_scales);
                       o.key("moments") << m.alpha << m.y_mean << m.y_scale << m.log_marginal_likelihood;
                   },
                   [&](const MlpModel& m) {
                       o.key("layers") << m.net.layers.size();
                       for (const auto& l : m.net.layers) {
                           o.key("W").mat(l.W);
                           o.key("b").vec(l.b);
                       }
                       o.key("moments") << m.y_mean << m.y_scale << m.epochs_run << m.best_validation_mae;
                   },
                   [&](const SigmoidLrModel& m) {
                       o.key("w").vec(m.w);
                       o.key("b") << m.b;
                       o.key("map") << m.map.lo << m.map.hi;
                       o.key("constant") << m.constant << m.constant_value << m.iterations;
                   },
                   [&](const KnnModel& m) {
                       o.key("k") << m.params.n_neighbors << m.params.p;
                       o.key("train").mat(m.X);
                       o.key("targets").vec(m.y);
                   },
               },
               f);
}

FittedModel read_fitted(In& in, Algorithm alg) {
    switch (alg) {
        case Algorithm::svr: {
            SvrModel m;
            in.expect("kernel");
            m.kernel.kind = in.word() == "poly" ? KernelSpec::Kind::poly : KernelSpec::Kind::rbf;
            m.kernel.gamma = in.num();
            m.kernel.degree = static_cast<int>(in.integer());
            in.expect("bias");
            m.bias = in.num();
            in.expect("support");
            m.support = in.mat();
            in.expect("coef");
            m.coef = in.vec();
            in.expect("converged");
            m.converged = in.integer() != 0;
            m.iterations = static_cast<long>(in.integer());
            if (m.coef.size() != m.support.rows()) in.fail("support/coef size mismatch");
            return m;
        }
        case Algorithm::rf: {
            ForestModel m;
            in.expect("trees");
            m.trees.resize(in.count());
            m.n_features = static_cast<int>(in.integer());
            for (auto& t : m.trees) {
                in.expect("tree");
                t.nodes.resize(in.count());
                for (auto& n : t.nodes) {
                    n.feature = static_cast<int>(in.integer());
                    n.threshold = in.num();
                    n.left = static_cast<int>(in.integer());
                    n.right = static_cast<int>(in.integer());
                    n.value = in.num();
                }
            }
            return m;
        }
        case Algorithm::gp: {
            GpModel m;
            in.expect("train");
            m.X = in.mat();
            in.expect("weights");
            m.weights = in.vec();
            in.expect("chol");
            m.chol_lower = in.mat();
            in.expect("length_scales");
            m.length_scales = in.dvec();
            in.expect("moments");
            m.alpha = in.num();
            m.y_mean = in.num();
            m.y_scale = in.num();
            m.log_marginal_likelihood = in.num();
            return m;
        }
        case Algorithm::mlp: {
            MlpModel m;
            in.expect("layers");
            m.net.layers.resize(in.count());
            for (auto& l : m.net.layers) {
                in.expect("W");
                l.W = in.mat();
                in.expect("b");
                l.b = in.vec();
            }
            in.expect("moments");
            m.y_mean = in.num();
            m.y_scale = in.num();
            m.epochs_run = static_cast<int>(in.integer());
            m.best_validation_mae = in.num();
            return m;
        }
        case Algorithm::sigmoid_lr: {
            SigmoidLrModel m;
            in.expect("w");
            m.w = in.vec();
            in.expect("b");
            m.b = in.num();
            in.expect("map");
            m.map.lo = in.num();
            m.map.hi = in.num();
            in.expect("constant");
            m.constant = in.integer() != 0;
            m.constant_value = in.num();
            m.iterations = static_cast<int>(in.integer());
            return m;
        }
        case Algorithm::knn: {
            KnnModel m;
            in.expect("k");
            m.params.n_neighbors = static_cast<int>(in.integer());
            m.params.p = static_cast<int>(in.integer());
            in.expect("train");
            m.X = in.mat();
            in.expect("targets");
            m.y = in.vec();
            return m;
        }
    }
    in.fail("unknown algorithm");
}

}  // namespace

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::svr: return "svr";
        case Algorithm::rf: return "rf";
        case Algorithm::gp: return "gp";
        case Algorithm::mlp: return "mlp";
        case Algorithm::sigmoid_lr: return "sigmoid_lr";
        case Algorithm::knn: return "knn";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view s) {
    for (auto a : {Algorithm::svr, Algorithm::rf, Algorithm::gp, Algorithm::mlp, Algorithm::sigmoid_lr, Algorithm::knn})
        if (to_string(a) == s) return a;
    throw ConfigError("unknown algorithm '" + std::string(s) + "'");
}

std::string ModelSpec::label() const {
    auto f = [](double v) { return io::format_number(v); };
    return std::visit(overloaded{
                          [&](const SvrParams& p) {
                              std::string s = "svr(kernel=" + to_string(p.kernel.kind) + ",C=" + f(p.C) +
                                              ",epsilon=" + f(p.epsilon) + ",gamma=" + f(p.kernel.gamma);
                              if (p.kernel.kind == KernelSpec::Kind::poly) s += ",degree=" + std::to_string(p.kernel.degree);
                              return s + ")";
                          },
                          [&](const RfParams& p) {
                              return "rf(max_features=" + std::to_string(p.max_features) +
                                     ",n_estimators=" + std::to_string(p.n_estimators) +
                                     ",max_depth=" + std::to_string(p.max_depth) +
                                     ",min_samples_split=" + std::to_string(p.min_samples_split) +
                                     ",min_samples_leaf=" + std::to_string(p.min_samples_leaf) + ")";
                          },
                          [&](const GpParams& p) { return "gp(alpha=" + f(p.alpha) + ")"; },
                          [&](const MlpParams& p) {
                              return "mlp(hidden=" + join_ints(p.hidden, '-') + ",learning_rate=" + f(p.learning_rate) + ")";
                          },
                          [&](const SigmoidLrParams& p) {
                              return "sigmoid_lr(C=" + f(p.C) + ",penalty=" + to_string(p.penalty) + ")";
                          },
                          [&](const KnnParams& p) {
                              return "knn(n_neighbors=" + std::to_string(p.n_neighbors) + ",p=" + std::to_string(p.p) + ")";
                          },
                      },
                      params);
}

std::vector<int> GridAxes::range(int lo, int hi, int step) {
    std::vector<int> v;
    for (int x = lo; x <= hi; x += step) v.push_back(x);
    return v;
}

std::size_t grid_size(Algorithm a, const GridAxes& g) {
    switch (a) {
        case Algorithm::svr: {
            std::size_t per_kernel = g.svr_C.size() * g.svr_epsilon.size() * g.svr_gamma.size();
            std::size_t n = 0;
            for (const auto& k : g.svr_kernel) n += k == "poly" ? per_kernel * g.svr_degree.size() : per_kernel;
            return n;
        }
        case Algorithm::rf:
            return g.rf_max_features.size() * g.rf_n_estimators.size() * g.rf_max_depth.size() *
                   g.rf_min_samples_split.size() * g.rf_min_samples_leaf.size();
        case Algorithm::gp: return g.gp_alpha.size();
        case Algorithm::mlp: return g.mlp_hidden.size() * g.mlp_learning_rate.size();
        case Algorithm::sigmoid_lr: return g.lr_C.size() * g.lr_penalty.size();
        case Algorithm::knn: return g.knn_k.size() * g.knn_p.size();
    }
    return 0;
}

std::vector<ModelSpec> expand_grid(Algorithm a, const GridAxes& g) {
    std::vector<ModelSpec> out;
    out.reserve(grid_size(a, g));
    switch (a) {
        case Algorithm::svr:
            for (const auto& k : g.svr_kernel) {
                const bool poly = k == "poly";
                if (!poly && k != "rbf") throw ConfigError("unknown kernel '" + k + "'");
                const std::vector<int> degrees = poly ? g.svr_degree : std::vector<int>{3};
                for (double C : g.svr_C)
                    for (double eps : g.svr_epsilon)
                        for (double gamma : g.svr_gamma)
                            for (int d : degrees) {
                                SvrParams p;
                                p.C = C;
                                p.epsilon = eps;
                                p.kernel = poly ? KernelSpec::poly(gamma, d) : KernelSpec::rbf(gamma);
                                out.push_back({p});
                            }
            }
            break;
        case Algorithm::rf:
            for (int mf : g.rf_max_features)
                for (int ne : g.rf_n_estimators)
                    for (int md : g.rf_max_depth)
                        for (int ss : g.rf_min_samples_split)
                            for (int sl : g.rf_min_samples_leaf) out.push_back({RfParams{mf, ne, md, ss, sl, true, 0}});
            break;
        case Algorithm::gp:
            for (double al : g.gp_alpha) {
                GpParams p;
                p.alpha = al;
                out.push_back({p});
            }
            break;
        case Algorithm::mlp:
            for (const auto& h : g.mlp_hidden)
                for (double lr : g.mlp_learning_rate) {
                    MlpParams p;
                    p.hidden = h;
                    p.learning_rate = lr;
                    out.push_back({p});
                }
            break;
        case Algorithm::sigmoid_lr:
            for (double C : g.lr_C)
                for (const auto& pen : g.lr_penalty) {
                    SigmoidLrParams p;
                    p.C = C;
                    p.penalty = parse_penalty(pen);
                    out.push_back({p});
                }
            break;
        case Algorithm::knn:
            for (int k : g.knn_k)
                for (int p : g.knn_p) out.push_back({KnnParams{k, p}});
            break;
    }
    return out;
}

FittedModel fit_estimator(const ModelSpec& spec, const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          std::uint64_t seed, bool* converged) {
    if (converged) *converged = true;
    return std::visit(overloaded{
                          [&](const SvrParams& p) -> FittedModel {
                              try {
                                  return svr_fit(X, y, p);
                              } catch (ConvergenceError& e) {
                                  spdlog::warn("{}: {}; using the last iterate", spec.label(), e.what());
                                  if (converged) *converged = false;
                                  return std::move(e.best_iterate);
                              }
                          },
                          [&](RfParams p) -> FittedModel {
                              p.seed = seed;
                              return rf_fit(X, y, p);
                          },
                          [&](GpParams p) -> FittedModel {
                              p.seed = seed;
                              return gp_fit(X, y, p);
                          },
                          [&](MlpParams p) -> FittedModel {
                              p.seed = seed;
                              return mlp_fit(X, y, p);
                          },
                          [&](const SigmoidLrParams& p) -> FittedModel { return sigmoid_lr_fit(X, y, p); },
                          [&](const KnnParams& p) -> FittedModel { return knn_fit(X, y, p); },
                      },
                      spec.params);
}

double predict_estimator(const FittedModel& m, std::span<const double> x) {
    return std::visit(overloaded{
                          [&](const GpModel& g) { return g.predict(x).mean; },
                          [&](const auto& other) { return other.predict(x); },
                      },
                      m);
}

TrainedModel TrainedModel::fit(const ModelSpec& spec, const features::FeatureMatrix& train, const FitOptions& opts) {
    if (train.cols() == 0) throw ShapeError("cannot fit a model without feature columns");
    TrainedModel tm;
    tm.spec_ = spec;
    tm.fold_id_ = opts.fold_id;
    tm.seed_ = opts.seed;
    tm.scaler_ = features::fit_scaler(train);
    const Eigen::MatrixXd X = design(features::apply_scaler(tm.scaler_, train));
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(train.target().data(), static_cast<Eigen::Index>(train.rows()));
    tm.fitted_ = fit_estimator(spec, X, y, opts.seed, &tm.converged_);

    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        const Eigen::VectorXd x = X.row(r).transpose();
        const double p = predict_estimator(tm.fitted_, {x.data(), static_cast<std::size_t>(x.size())});
        if (!std::isfinite(p) || p < opts.guard_low || p > opts.guard_high) {
            tm.guardband_ = true;
            break;
        }
    }
    if (tm.guardband_) spdlog::warn("{}: training predictions leave the plausible HR band", spec.label());
    return tm;
}

double TrainedModel::predict_row(std::span<const double> raw) const {
    if (raw.size() != scaler_.columns.size()) throw ShapeError("feature row arity differs from the trained model");
    std::vector<double> x(raw.begin(), raw.end());
    features::apply_scaler_inplace(scaler_, x);
    return predict_estimator(fitted_, x);
}

std::vector<double> TrainedModel::predict(const features::FeatureMatrix& m) const {
    if (m.columns() != scaler_.columns) throw ShapeError("feature columns differ from those the model was trained on");
    std::vector<double> out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) out[r] = predict_row(m.row(r));
    return out;
}

std::string TrainedModel::serialize() const {
    Out o;
    o.key(kMagic) << kFormatVersion;
    o.key("spec");
    write_spec(o, spec_);
    o.key("fold") << fold_id_;
    o.key("seed").word(std::to_string(seed_));
    o.key("flags") << guardband_ << converged_;
    o.key("features") << scaler_.columns.size();
    for (const auto& c : scaler_.columns) o.key("f").word(c);
    o.key("scaler");
    for (std::size_t i = 0; i < scaler_.columns.size(); ++i) o << scaler_.mean[i] << scaler_.sd[i] << static_cast<bool>(scaler_.constant[i]);
    o.key("fitted");
    write_fitted(o, fitted_);
    o.key("end");
    return o.str();
}

TrainedModel TrainedModel::deserialize(std::string_view text) {
    In in(text);
    in.expect(kMagic);
    if (const auto v = in.integer(); v != kFormatVersion)
        in.fail("unsupported model format version " + std::to_string(v));
    TrainedModel tm;
    in.expect("spec");
    tm.spec_ = read_spec(in);
    in.expect("fold");
    tm.fold_id_ = static_cast<int>(in.integer());
    in.expect("seed");
    {
        const auto w = in.word();
        std::from_chars(w.data(), w.data() + w.size(), tm.seed_);
    }
    in.expect("flags");
    tm.guardband_ = in.integer() != 0;
    tm.converged_ = in.integer() != 0;
    in.expect("features");
    const std::size_t nf = in.count();
    for (std::size_t i = 0; i < nf; ++i) {
        in.expect("f");
        tm.scaler_.columns.emplace_back(in.word());
    }
    in.expect("scaler");
    for (std::size_t i = 0; i < nf; ++i) {
        tm.scaler_.mean.push_back(in.num());
        tm.scaler_.sd.push_back(in.num());
        tm.scaler_.constant.push_back(in.integer() != 0);
    }
    in.expect("fitted");
    tm.fitted_ = read_fitted(in, tm.spec_.algorithm());
    in.expect("end");
    return tm;
}

}  // namespace hrcal::models
