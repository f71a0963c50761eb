#include "hrcal/filter.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "hrcal/errors.hpp"

namespace hrcal::dsp {

namespace {

using cplx = std::complex<double>;

std::vector<cplx> prototype_poles(int order) {
    std::vector<cplx> poles;
    for (int k = 0; k < order; ++k) {
        const double theta = std::numbers::pi * (2.0 * k + order + 1) / (2.0 * order);
        poles.push_back(std::polar(1.0, theta));
    }
    return poles;
}

cplx bilinear(cplx s, double fs) { return (2.0 * fs + s) / (2.0 * fs - s); }

double prewarp(double f_hz, double fs) { return 2.0 * fs * std::tan(std::numbers::pi * f_hz / fs); }

// Splits digital poles into conjugate pairs (one section each) and pairs up
// the remaining real poles. A lone real pole yields a first-order section.
std::vector<std::pair<cplx, cplx>> pair_poles(std::vector<cplx> poles) {
    constexpr double tol = 1e-12;
    std::vector<std::pair<cplx, cplx>> out;
    std::vector<cplx> reals;
    for (const auto& p : poles) {
        if (std::abs(p.imag()) <= tol) reals.push_back(cplx(p.real(), 0.0));
        else if (p.imag() > 0) out.emplace_back(p, std::conj(p));
    }
    std::sort(reals.begin(), reals.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) out.emplace_back(reals[i], reals[i + 1]);
    if (reals.size() % 2 == 1) out.emplace_back(reals.back(), cplx(0.0, 0.0));
    return out;
}

cplx section_response(const Biquad& s, cplx z1) {
    const cplx z2 = z1 * z1;
    return (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
}

cplx cascade_response(const Sos& sos, double omega) {
    const cplx z1 = std::polar(1.0, -omega);
    cplx h(1.0, 0.0);
    for (const auto& s : sos) h *= section_response(s, z1);
    return h;
}

void scale_to_unit_gain(Sos& sos, double omega) {
    const double mag = std::abs(cascade_response(sos, omega));
    const double per = std::pow(1.0 / mag, 1.0 / static_cast<double>(sos.size()));
    for (auto& s : sos) {
        s.b0 *= per;
        s.b1 *= per;
        s.b2 *= per;
    }
}

// Section states that make the cascade's output constant for a unit input.
std::vector<std::array<double, 2>> steady_state(const Sos& sos) {
    std::vector<std::array<double, 2>> zi(sos.size());
    double x = 1.0;
    for (std::size_t i = 0; i < sos.size(); ++i) {
        const auto& s = sos[i];
        const double y = x * (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
        zi[i][0] = y - s.b0 * x;
        zi[i][1] = s.b2 * x - s.a2 * y;
        x = y;
    }
    return zi;
}

void run_cascade(const Sos& sos, std::vector<double>& x, std::vector<std::array<double, 2>> state) {
    for (std::size_t k = 0; k < sos.size(); ++k) {
        const auto& s = sos[k];
        double z1 = state[k][0];
        double z2 = state[k][1];
        for (double& v : x) {
            const double in = v;
            const double out = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * out + z2;
            z2 = s.b2 * in - s.a2 * out;
            v = out;
        }
    }
}

}  // namespace

Sos butter_bandpass(int order, double low_hz, double high_hz, double fs) {
    if (order < 1) throw ConfigError("filter order must be >= 1");
    if (!(low_hz > 0.0 && low_hz < high_hz && high_hz < fs / 2.0))
        throw ConfigError("bandpass requires 0 < low < high < fs/2");
    const double wl = prewarp(low_hz, fs);
    const double wh = prewarp(high_hz, fs);
    const double bw = wh - wl;
    const double w0 = std::sqrt(wl * wh);

    std::vector<cplx> digital;
    for (const auto& p : prototype_poles(order)) {
        const cplx a = p * (bw / 2.0);
        const cplx disc = std::sqrt(a * a - w0 * w0);
        digital.push_back(bilinear(a + disc, fs));
        digital.push_back(bilinear(a - disc, fs));
    }

    Sos sos;
    for (const auto& [p, q] : pair_poles(digital)) {
        Biquad s;
        s.b0 = 1.0;
        s.b1 = 0.0;
        s.b2 = -1.0;
        s.a1 = -(p + q).real();
        s.a2 = (p * q).real();
        sos.push_back(s);
    }
    scale_to_unit_gain(sos, 2.0 * std::atan(w0 / (2.0 * fs)));
    return sos;
}

Sos butter_lowpass(int order, double cutoff_hz, double fs) {
    if (order < 1) throw ConfigError("filter order must be >= 1");
    if (!(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0)) throw ConfigError("lowpass requires 0 < cutoff < fs/2");
    const double wc = prewarp(cutoff_hz, fs);
    std::vector<cplx> digital;
    for (const auto& p : prototype_poles(order)) digital.push_back(bilinear(p * wc, fs));

    Sos sos;
    const auto pairs = pair_poles(digital);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& [p, q] = pairs[i];
        Biquad s;
        if (order % 2 == 1 && i + 1 == pairs.size()) {
            // first-order section: zero at -1, single real pole
            s.b0 = 1.0;
            s.b1 = 1.0;
            s.b2 = 0.0;
            s.a1 = -p.real();
            s.a2 = 0.0;
        } else {
            s.b0 = 1.0;
            s.b1 = 2.0;
            s.b2 = 1.0;
            s.a1 = -(p + q).real();
            s.a2 = (p * q).real();
        }
        sos.push_back(s);
    }
    scale_to_unit_gain(sos, 0.0);
    return sos;
}

double magnitude_response(const Sos& sos, double f_hz, double fs) {
    return std::abs(cascade_response(sos, 2.0 * std::numbers::pi * f_hz / fs));
}

std::vector<double> sosfilt(const Sos& sos, std::span<const double> x) {
    std::vector<double> y(x.begin(), x.end());
    run_cascade(sos, y, std::vector<std::array<double, 2>>(sos.size(), {0.0, 0.0}));
    return y;
}

std::vector<double> sosfiltfilt(const Sos& sos, std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    std::size_t pad = 3 * (2 * sos.size() + 1);
    pad = std::min(pad, n - 1);

    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    const auto zi = steady_state(sos);
    auto scaled = [&](double v) {
        auto z = zi;
        for (auto& s : z) {
            s[0] *= v;
            s[1] *= v;
        }
        return z;
    };

    run_cascade(sos, ext, scaled(ext.front()));
    std::reverse(ext.begin(), ext.end());
    run_cascade(sos, ext, scaled(ext.front()));
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + static_cast<std::ptrdiff_t>(pad),
                               ext.begin() + static_cast<std::ptrdiff_t>(pad + n));
}

}  // namespace hrcal::dsp
