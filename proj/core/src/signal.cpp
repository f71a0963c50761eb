#include "hrcal/signal.hpp"

#include <algorithm>
#include <cmath>

#include "hrcal/errors.hpp"
#include "hrcal/filter.hpp"

namespace hrcal::signal {

namespace {

double uniform_rate(const std::vector<double>& t) {
    if (t.size() < 2) return 0.0;
    return static_cast<double>(t.size() - 1) / (t.back() - t.front());
}

}  // namespace

SampledSeries bandpass_ecg(const SampledSeries& ecg, const FilterSpec& spec) {
    SampledSeries out = ecg;
    out.source = Source::derived;
    if (ecg.size() < 2) {
        std::fill(out.v.begin(), out.v.end(), 0.0);
        return out;
    }
    const double fs = uniform_rate(ecg.t);
    if (!(fs > 40.0)) throw ConfigError("ECG sampling rate must exceed 40 Hz");
    if (spec.kind != FilterKind::bandpass) throw ConfigError("bandpass_ecg requires a bandpass FilterSpec");
    const auto sos = dsp::butter_bandpass(spec.order, spec.low_hz, spec.high_hz, fs);
    out.v = dsp::sosfiltfilt(sos, ecg.v);
    return out;
}

std::vector<double> detect_r_peaks(const SampledSeries& filtered, const PeakDetectorConfig& cfg) {
    const std::size_t n = filtered.size();
    if (n < 3) return {};
    const double fs = uniform_rate(filtered.t);

    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = filtered.v[i] * filtered.v[i];

    std::vector<double> c1(n + 1, 0.0), c2(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        c1[i + 1] = c1[i] + sq[i];
        c2[i + 1] = c2[i] + sq[i] * sq[i];
    }
    const auto half = static_cast<std::size_t>(std::max(1.0, std::round(cfg.window_s * fs / 2.0)));

    struct Candidate {
        std::size_t idx;
        double value;
    };
    std::vector<Candidate> accepted;
    const double dt_nominal = 1.0 / fs;

    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(sq[i] >= sq[i - 1] && sq[i] > sq[i + 1])) continue;
        const std::size_t lo = i > half ? i - half : 0;
        const std::size_t hi = std::min(n, i + half + 1);
        const double m = static_cast<double>(hi - lo);
        const double mean = (c1[hi] - c1[lo]) / m;
        const double var = std::max(0.0, (c2[hi] - c2[lo]) / m - mean * mean);
        if (!(sq[i] > mean + cfg.threshold_k * std::sqrt(var))) continue;

        if (!accepted.empty()) {
            auto& last = accepted.back();
            if (filtered.t[i] - filtered.t[last.idx] < cfg.refractory_s) {
                if (sq[i] > last.value) last = {i, sq[i]};
                continue;
            }
        }
        accepted.push_back({i, sq[i]});
    }

    std::vector<double> peaks;
    peaks.reserve(accepted.size());
    for (const auto& c : accepted) {
        const std::size_t i = c.idx;
        const double denom = sq[i - 1] - 2.0 * sq[i] + sq[i + 1];
        double delta = denom != 0.0 ? 0.5 * (sq[i - 1] - sq[i + 1]) / denom : 0.0;
        delta = std::clamp(delta, -0.5, 0.5);
        const double step = delta >= 0.0 ? filtered.t[i + 1] - filtered.t[i] : filtered.t[i] - filtered.t[i - 1];
        peaks.push_back(filtered.t[i] + delta * (std::isfinite(step) ? step : dt_nominal));
    }
    return peaks;
}

HeartRateSeries rr_to_hr(const std::vector<double>& peaks) {
    if (peaks.size() < 2) throw InsufficientDataError("rr_to_hr needs at least two R-peaks");
    HeartRateSeries hr;
    hr.series.unit = Unit::bpm;
    hr.series.source = Source::ecg;
    hr.provenance = Provenance::ecg_truth;
    for (std::size_t i = 0; i + 1 < peaks.size(); ++i)
        hr.series.push_back(peaks[i + 1], 60.0 / (peaks[i + 1] - peaks[i]));
    return hr;
}

HeartRateSeries drop_implausible(const HeartRateSeries& hr) {
    HeartRateSeries out;
    out.provenance = hr.provenance;
    out.series.unit = hr.series.unit;
    out.series.source = hr.series.source;
    for (std::size_t i = 0; i < hr.size(); ++i) {
        const double v = hr.series.v[i];
        if (v > kMinPlausibleBpm && v < kMaxPlausibleBpm) out.series.push_back(hr.series.t[i], v);
    }
    return out;
}

HeartRateSeries resample_uniform(const HeartRateSeries& hr, double rate_hz) {
    if (!(rate_hz > 0.0)) throw ConfigError("resample rate must be positive");
    HeartRateSeries out;
    out.provenance = hr.provenance;
    out.series.unit = hr.series.unit;
    out.series.source = hr.series.source;
    const auto& t = hr.series.t;
    const auto& v = hr.series.v;
    if (t.empty()) return out;
    if (t.size() == 1) {
        out.series.push_back(t[0], v[0]);
        return out;
    }
    const double step = 1.0 / rate_hz;
    const auto count = static_cast<std::size_t>(std::floor((t.back() - t.front()) / step + 1e-9)) + 1;
    std::size_t j = 0;
    for (std::size_t k = 0; k < count; ++k) {
        const double tk = t.front() + static_cast<double>(k) * step;
        while (j + 2 < t.size() && t[j + 1] < tk) ++j;
        const double w = std::clamp((tk - t[j]) / (t[j + 1] - t[j]), 0.0, 1.0);
        out.series.push_back(tk, v[j] + w * (v[j + 1] - v[j]));
    }
    return out;
}

HeartRateSeries lowpass_hr(const HeartRateSeries& hr, double normalized_cutoff, int order) {
    if (!(normalized_cutoff > 0.0 && normalized_cutoff < 1.0))
        throw ConfigError("normalized lowpass cutoff must lie in (0, 1)");
    HeartRateSeries out = hr;
    if (hr.size() < 2) return out;
    const double fs = uniform_rate(hr.series.t);
    const auto sos = dsp::butter_lowpass(order, normalized_cutoff * fs / 2.0, fs);
    out.series.v = dsp::sosfiltfilt(sos, hr.series.v);
    return out;
}

HeartRateSeries shift_series(const HeartRateSeries& hr, double delay_s) {
    HeartRateSeries out = hr;
    for (double& t : out.series.t) t += delay_s;
    return out;
}

HeartRateSeries shift_by_state(const HeartRateSeries& hr, const Schedule& schedule,
                               const std::array<double, 3>& delay_by_state) {
    HeartRateSeries out;
    out.provenance = hr.provenance;
    out.series.unit = hr.series.unit;
    out.series.source = hr.series.source;
    for (std::size_t i = 0; i < hr.size(); ++i) {
        const double t = hr.series.t[i];
        const auto st = state_at(schedule, t);
        if (!st) continue;
        const double shifted = t + delay_by_state[static_cast<std::size_t>(*st)];
        if (!out.series.t.empty() && shifted <= out.series.t.back()) continue;
        out.series.push_back(shifted, hr.series.v[i]);
    }
    return out;
}

HeartRateSeries align_to_grid(const HeartRateSeries& hr, double grid_step_s, double tolerance_s) {
    if (!(grid_step_s > 0.0)) throw ConfigError("grid step must be positive");
    HeartRateSeries out;
    out.provenance = hr.provenance;
    out.series.unit = hr.series.unit;
    out.series.source = hr.series.source;
    const auto& t = hr.series.t;
    if (t.empty()) return out;

    const auto k_lo = static_cast<long long>(std::max(0.0, std::ceil((t.front() - tolerance_s) / grid_step_s)));
    const auto k_hi = static_cast<long long>(std::floor((t.back() + tolerance_s) / grid_step_s));
    for (long long k = k_lo; k <= k_hi; ++k) {
        const double g = static_cast<double>(k) * grid_step_s;
        const auto it = std::lower_bound(t.begin(), t.end(), g);
        std::size_t best = t.size();
        double best_d = tolerance_s;
        if (it != t.begin()) {
            const auto j = static_cast<std::size_t>(it - t.begin()) - 1;
            const double d = g - t[j];
            if (d <= best_d) {
                best = j;
                best_d = d;
            }
        }
        if (it != t.end()) {
            const auto j = static_cast<std::size_t>(it - t.begin());
            const double d = t[j] - g;
            if (d <= tolerance_s && (best == t.size() || d < best_d)) best = j;
        }
        if (best != t.size()) out.series.push_back(g, hr.series.v[best]);
    }
    return out;
}

HeartRateSeries extract_smoothed_hr(const SampledSeries& ecg, const ExtractionConfig& cfg) {
    const auto filtered = bandpass_ecg(ecg, cfg.bandpass);
    const auto peaks = detect_r_peaks(filtered, cfg.peaks);
    auto hr = drop_implausible(rr_to_hr(peaks));
    hr = resample_uniform(hr, cfg.resample_hz);
    return lowpass_hr(hr, cfg.lowpass.normalized_cutoff, cfg.lowpass.order);
}

HeartRateSeries extract_truth_hr(const SessionRecord& session, const ExtractionConfig& cfg) {
    auto hr = extract_smoothed_hr(session.ecg, cfg);
    hr = shift_by_state(hr, session.schedule, cfg.shift_s);
    return align_to_grid(hr, cfg.grid_step_s, cfg.grid_tolerance_s);
}

}  // namespace hrcal::signal
