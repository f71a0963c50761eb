#pragma once

#include <array>
#include <vector>

#include "hrcal/series.hpp"

namespace hrcal::signal {

enum class FilterKind { bandpass, lowpass };

struct FilterSpec {
    FilterKind kind = FilterKind::bandpass;
    double low_hz = 15.0;
    double high_hz = 20.0;
    double normalized_cutoff = 0.05;  // lowpass only, fraction of Nyquist
    int order = 4;

    static FilterSpec ecg_bandpass() { return {}; }
    static FilterSpec hr_lowpass() { return {FilterKind::lowpass, 0.0, 0.0, 0.05, 2}; }
};

enum class Provenance { ecg_truth, device_raw, calibrated };

struct HeartRateSeries {
    SampledSeries series;
    Provenance provenance = Provenance::ecg_truth;

    std::size_t size() const noexcept { return series.size(); }
};

inline constexpr double kMinPlausibleBpm = 20.0;
inline constexpr double kMaxPlausibleBpm = 250.0;

// Zero-phase Butterworth bandpass. Requires uniform sampling with fs > 40 Hz
// and a band that fits below Nyquist.
SampledSeries bandpass_ecg(const SampledSeries& ecg, const FilterSpec& spec = FilterSpec::ecg_bandpass());

struct PeakDetectorConfig {
    double window_s = 2.0;       // rolling mean/std window on the squared signal
    double threshold_k = 2.5;    // threshold = mean + k * std
    double refractory_s = 0.25;
};

// R-peak times (s). Candidates are local maxima of the squared bandpassed
// signal above the rolling threshold; within the refractory period the larger
// candidate survives. Peak times are refined by parabolic interpolation.
std::vector<double> detect_r_peaks(const SampledSeries& filtered, const PeakDetectorConfig& cfg = {});

// One sample (t_{i+1}, 60 / (t_{i+1} - t_i)) per interval.
HeartRateSeries rr_to_hr(const std::vector<double>& peaks);

// Drops samples outside the plausible (20, 250) bpm band.
HeartRateSeries drop_implausible(const HeartRateSeries& hr);

// Linear interpolation onto a uniform grid starting at the first sample.
HeartRateSeries resample_uniform(const HeartRateSeries& hr, double rate_hz);

// Zero-phase Butterworth lowpass. Cutoff is a fraction of the Nyquist rate of
// the (already uniform) input series.
HeartRateSeries lowpass_hr(const HeartRateSeries& hr, double normalized_cutoff, int order = 2);

HeartRateSeries shift_series(const HeartRateSeries& hr, double delay_s);

// Delays each sample by the amount configured for the state in effect at its
// original timestamp; samples outside the schedule are dropped. Order is
// preserved when the delays differ between adjacent states because any
// resulting collision is resolved by dropping the later sample.
HeartRateSeries shift_by_state(const HeartRateSeries& hr, const Schedule& schedule,
                               const std::array<double, 3>& delay_by_state);

// One sample per grid point k * step (k >= 0): the nearest input sample within
// `tolerance_s`; the earlier of two equidistant samples wins. Grid points with
// no sample in tolerance are absent.
HeartRateSeries align_to_grid(const HeartRateSeries& hr, double grid_step_s, double tolerance_s);

struct ExtractionConfig {
    FilterSpec bandpass = FilterSpec::ecg_bandpass();
    PeakDetectorConfig peaks;
    double resample_hz = 4.0;
    FilterSpec lowpass = FilterSpec::hr_lowpass();
    std::array<double, 3> shift_s = {10.0, 10.0, 10.0};  // RS, LS, IS
    double grid_step_s = 15.0;
    double grid_tolerance_s = 2.0;
};

// ECG -> smoothed HR at resample_hz, before any lag shift.
HeartRateSeries extract_smoothed_hr(const SampledSeries& ecg, const ExtractionConfig& cfg);

// Full ground-truth chain: bandpass, peaks, RR -> HR, resample, lowpass,
// per-state shift, grid alignment.
HeartRateSeries extract_truth_hr(const SessionRecord& session, const ExtractionConfig& cfg);

}  // namespace hrcal::signal
