#pragma once

#include <span>

namespace hrcal::stats {

double mean(std::span<const double> x);

// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sample_sd(std::span<const double> x);

// Population standard deviation (n denominator).
double population_sd(std::span<const double> x);

double pearson_r(std::span<const double> x, std::span<const double> y);

// Upper tail P(F > f) for F(d1, d2).
double f_upper_tail(double f, double d1, double d2);

// Two-sided P(|T| > |t|) for Student t with `dof` degrees of freedom.
double t_two_sided(double t, double dof);

double digamma(double x);

}  // namespace hrcal::stats
