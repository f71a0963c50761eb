#include "hrcal/models/kernel.hpp"

#include <cmath>

#include "hrcal/errors.hpp"

namespace hrcal::models {

std::string to_string(KernelSpec::Kind kind) { return kind == KernelSpec::Kind::rbf ? "rbf" : "poly"; }

void validate(const KernelSpec& spec) {
    if (!(spec.gamma > 0.0)) throw ConfigError("kernel gamma must be positive");
    if (spec.kind == KernelSpec::Kind::poly && spec.degree < 2)
        throw ConfigError("polynomial kernel degree must be >= 2");
}

double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("kernel arguments have different dimensions");
    validate(spec);
    if (spec.kind == KernelSpec::Kind::rbf) {
        double d2 = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            d2 += d * d;
        }
        return std::exp(-spec.gamma * d2);
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
    return std::pow(spec.gamma * dot + 1.0, spec.degree);
}

}  // namespace hrcal::models
