#pragma once

#include <span>
#include <string>

namespace hrcal::models {

// K_rbf(a, b)  = exp(-gamma * ||a - b||^2)
// K_poly(a, b) = (gamma * a.b + 1)^degree
struct KernelSpec {
    enum class Kind { rbf, poly };
    Kind kind = Kind::rbf;
    double gamma = 0.1;
    int degree = 3;

    static KernelSpec rbf(double gamma) { return {Kind::rbf, gamma, 3}; }
    static KernelSpec poly(double gamma, int degree) { return {Kind::poly, gamma, degree}; }
};

std::string to_string(KernelSpec::Kind kind);

// Throws ShapeError on dimension mismatch and ConfigError on non-positive
// gamma or a polynomial degree below 2.
double kernel_eval(const KernelSpec& spec, std::span<const double> a, std::span<const double> b);

void validate(const KernelSpec& spec);

}  // namespace hrcal::models
