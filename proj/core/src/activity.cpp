#include "hrcal/activity.hpp"

#include <cmath>

#include "hrcal/errors.hpp"
#include "hrcal/filter.hpp"

namespace hrcal::activity {

std::string_view to_string(PalLevel level) {
    switch (level) {
        case PalLevel::SED: return "SED";
        case PalLevel::LPA: return "LPA";
        case PalLevel::MPA: return "MPA";
        case PalLevel::VPA: return "VPA";
    }
    return "?";
}

const PalScheme& crouter_va() {
    static const PalScheme s{"crouter_va", AxisMode::VA, {35, 360, 1129}};
    return s;
}

const PalScheme& crouter_vm() {
    static const PalScheme s{"crouter_vm", AxisMode::VM, {100, 609, 1809}};
    return s;
}

const PalScheme& freedson_va() {
    static const PalScheme s{"freedson_va", AxisMode::VA, {99, 759, 5724}};
    return s;
}

// The printed table lists MPA as 2020-5998 and VPA as >=5998; 5998 stays MPA.
const PalScheme& troiano_va() {
    static const PalScheme s{"troiano_va", AxisMode::VA, {100, 2019, 5998}};
    return s;
}

const std::vector<PalScheme>& all_schemes() {
    static const std::vector<PalScheme> v{crouter_va(), crouter_vm(), freedson_va(), troiano_va()};
    return v;
}

const PalScheme& scheme_by_name(std::string_view name) {
    for (const auto& s : all_schemes())
        if (s.name == name) return s;
    throw ConfigError("unknown PAL scheme '" + std::string(name) + "'");
}

PalLevel classify_pal(double cpm, const PalScheme& scheme) {
    if (!(cpm >= 0.0)) throw DomainError("cpm must be non-negative");
    if (cpm <= scheme.upper[0]) return PalLevel::SED;
    if (cpm <= scheme.upper[1]) return PalLevel::LPA;
    if (cpm <= scheme.upper[2]) return PalLevel::MPA;
    return PalLevel::VPA;
}

SampledSeries compute_counts(const TriaxialSeries& accel, AxisMode mode, const CountConfig& cfg) {
    const std::size_t n = accel.size();
    if (n < 2) throw InsufficientDataError("compute_counts needs at least one minute of data");
    const double fs = static_cast<double>(n - 1) / (accel.t.back() - accel.t.front());
    if (fs < 20.0 - 1e-9) throw ConfigError("accelerometer sampling rate must be at least 20 Hz");

    const auto per_minute = static_cast<std::size_t>(std::llround(60.0 * fs));
    const auto per_epoch = static_cast<std::size_t>(std::llround(cfg.epoch_s * fs));
    const std::size_t minutes = n / per_minute;
    if (minutes == 0) throw InsufficientDataError("compute_counts needs at least one minute of data");

    const auto sos = dsp::butter_bandpass(cfg.order, cfg.low_hz, cfg.high_hz, fs);
    std::vector<double> rect;
    if (mode == AxisMode::VA) {
        rect = dsp::sosfiltfilt(sos, accel.y);
        for (double& v : rect) v = std::abs(v);
    } else {
        const auto fx = dsp::sosfiltfilt(sos, accel.x);
        const auto fy = dsp::sosfiltfilt(sos, accel.y);
        const auto fz = dsp::sosfiltfilt(sos, accel.z);
        rect.resize(n);
        for (std::size_t i = 0; i < n; ++i) rect[i] = std::sqrt(fx[i] * fx[i] + fy[i] * fy[i] + fz[i] * fz[i]);
    }

    const double dt = 1.0 / fs;
    SampledSeries out;
    out.unit = Unit::cpm;
    out.source = Source::derived;
    for (std::size_t m = 0; m < minutes; ++m) {
        const std::size_t begin = m * per_minute;
        const std::size_t end = begin + per_minute;
        double total = 0.0;
        for (std::size_t e = begin; e < end; e += per_epoch) {
            double epoch = 0.0;
            for (std::size_t i = e; i < std::min(end, e + per_epoch); ++i) epoch += rect[i] * dt;
            total += epoch * cfg.counts_per_g_s;
        }
        out.push_back(accel.t[begin], total);
    }
    return out;
}

SampledSeries steps_per_minute(const SampledSeries& cumulative) {
    SampledSeries out;
    out.unit = Unit::steps_per_min;
    out.source = Source::derived;
    for (std::size_t i = 1; i < cumulative.size(); ++i) {
        const double delta = cumulative.v[i] - cumulative.v[i - 1];
        if (delta < 0.0)
            throw ValidationError("cumulative step count decreases at index " + std::to_string(i));
        const double dt = cumulative.t[i] - cumulative.t[i - 1];
        out.push_back(cumulative.t[i], 60.0 * delta / dt);
    }
    return out;
}

}  // namespace hrcal::activity
