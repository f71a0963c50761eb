#include "hrcal/stats.hpp"

#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/digamma.hpp>

namespace hrcal::stats {

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

namespace {

double sum_sq_dev(std::span<const double> x) {
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss;
}

}  // namespace

double sample_sd(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    return std::sqrt(sum_sq_dev(x) / static_cast<double>(x.size() - 1));
}

double population_sd(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::sqrt(sum_sq_dev(x) / static_cast<double>(x.size()));
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
    const double mx = mean(x);
    const double my = mean(y);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

double f_upper_tail(double f, double d1, double d2) {
    if (std::isnan(f)) return 1.0;
    if (f <= 0.0) return 1.0;
    if (std::isinf(f)) return 0.0;
    boost::math::fisher_f dist(d1, d2);
    return boost::math::cdf(boost::math::complement(dist, f));
}

double t_two_sided(double t, double dof) {
    if (std::isnan(t)) return 1.0;
    if (std::isinf(t)) return 0.0;
    boost::math::students_t dist(dof);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

double digamma(double x) { return boost::math::digamma(x); }

}  // namespace hrcal::stats
