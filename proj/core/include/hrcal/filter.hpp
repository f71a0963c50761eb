#pragma once

#include <span>
#include <vector>

namespace hrcal::dsp {

// One second-order section, a0 normalised to 1.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

using Sos = std::vector<Biquad>;

// Digital Butterworth designs via the bilinear transform with prewarping.
// A bandpass of order N has 2N poles (N sections); a lowpass of order N has
// ceil(N/2) sections. Cutoffs are in Hz.
Sos butter_bandpass(int order, double low_hz, double high_hz, double fs);
Sos butter_lowpass(int order, double cutoff_hz, double fs);

// |H(e^{j 2 pi f / fs})| of the cascade.
double magnitude_response(const Sos& sos, double f_hz, double fs);

// Causal cascade filtering with zero initial state.
std::vector<double> sosfilt(const Sos& sos, std::span<const double> x);

// Forward-backward filtering with odd-reflection padding and steady-state
// initial conditions, so a constant input passes through with gain H(0).
std::vector<double> sosfiltfilt(const Sos& sos, std::span<const double> x);

}  // namespace hrcal::dsp
