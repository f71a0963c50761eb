#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hrcal/series.hpp"

namespace hrcal::synth {

// Error model of one simulated wrist device. Per-state arrays are indexed
// RS, LS, IS.
struct DeviceModel {
    std::string name = "device";
    double interval_s = 5.0;
    double lag_s = 10.0;
    std::array<double, 3> bias_bpm = {1.5, -0.8, 0.0};
    std::array<double, 3> noise_sd_bpm = {3.2, 2.2, 6.5};
    double ma_gain = 7.0;             // extra noise sd per 1000 cpm
    double bias_per_step_rate = -0.1;   // IS bias in bpm per step/min
    double noise_ar = 0.8;            // AR(1) coefficient between device samples
};

struct CohortConfig {
    int n_participants = 12;
    std::uint64_t seed = 42;
    double fs_ecg = 250.0;
    double fs_acc = 32.0;
    double rs_min = 30.0;
    double ls_min_low = 60.0;
    double ls_min_high = 90.0;
    // Treadmill block: rest, 2, 5, 8 km/h, 2 km/h cool-down, rest.
    std::vector<double> is_speeds_kmh{0.0, 2.0, 5.0, 8.0, 2.0, 0.0};
    std::vector<double> is_segment_min{10.0, 5.0, 5.0, 5.0, 5.0, 10.0};
    double speed_ramp_s = 30.0;
    double step_interval_s = 60.0;
    DeviceModel device;
    std::vector<DeviceModel> extra_devices;
    double ecg_noise_mv = 0.02;

    void validate() const;
};

struct GroundTruth {
    std::string participant;
    SampledSeries true_hr;        // 4 Hz
    double fitness_offset = 0.0;  // standard normal; higher is fitter
    SampledSeries speed_kmh;      // 1 Hz treadmill speed (0 outside IS)
    SampledSeries expected_cpm;   // 1 Hz vertical-axis counts implied by the motion amplitude
};

struct SyntheticParticipant {
    SessionRecord session;
    GroundTruth truth;
};

// Participant `index` of the cohort; deterministic in (cfg, index).
SyntheticParticipant generate_participant(const CohortConfig& cfg, int index);
std::vector<SyntheticParticipant> generate_cohort(const CohortConfig& cfg, int jobs = 1);

// Treadmill cadence in steps/min at a given speed (0 when standing).
double cadence_spm(double speed_kmh);
// Vertical motion amplitude (g) at a given speed.
double motion_amplitude_g(double speed_kmh);

// Linear interpolation of the generator truth, clamped at the ends.
double truth_at(const GroundTruth& truth, double t);

struct DeviceContext {
    double t;
    double device_bpm;
    double true_bpm;
    double cpm;
    ActivityState state;
};

using ProfileFn = std::function<double(const DeviceContext&)>;

// Replaces every primary device HR sample with profile_fn(context). The
// context carries the current device value, the generator truth at the same
// time, the expected counts and the state. Ground truth is untouched.
SessionRecord inject_known_miscalibration(const SessionRecord& session, const GroundTruth& truth,
                                          const ProfileFn& profile_fn);

}  // namespace hrcal::synth
