#include "hrcal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "hrcal/activity.hpp"
#include "hrcal/errors.hpp"
#include "hrcal/parallel.hpp"

namespace hrcal::synth {

namespace {

constexpr double kTruthHz = 4.0;
constexpr double kMinHr = 40.0;
constexpr double kMaxHr = 190.0;
constexpr double kMaxSlope = 3.0;  // bpm/s

struct Timeline {
    double rs_end;
    double ls_end;
    double end;
    std::vector<double> seg_start;  // absolute IS segment starts
    std::vector<double> speeds;
    double ramp_s;

    double speed_at(double t) const {
        if (t < ls_end || t >= end) return 0.0;
        std::size_t k = 0;
        while (k + 1 < seg_start.size() && t >= seg_start[k + 1]) ++k;
        const double prev = k == 0 ? 0.0 : speeds[k - 1];
        const double frac = ramp_s > 0.0 ? std::min(1.0, (t - seg_start[k]) / ramp_s) : 1.0;
        return prev + (speeds[k] - prev) * frac;
    }
    ActivityState state_at(double t) const {
        if (t < rs_end) return ActivityState::RS;
        if (t < ls_end) return ActivityState::LS;
        return ActivityState::IS;
    }
};

double expected_cpm_at(double speed) {
    // 128 counts/(g s) * 60 s * mean |A sin| = 7680 * 2A / pi, plus a resting floor.
    return 7680.0 * 2.0 / std::numbers::pi * motion_amplitude_g(speed) + 10.0;
}

// Gaussian-derivative QRS surrogate with unit peak, sigma 10 ms.
double qrs(double tau) {
    constexpr double sigma = 0.010;
    const double u = tau / sigma;
    return -u * std::exp(0.5 - 0.5 * u * u);
}

double interp(const SampledSeries& s, double t) {
    if (s.empty()) return 0.0;
    if (t <= s.t.front()) return s.v.front();
    if (t >= s.t.back()) return s.v.back();
    const auto it = std::upper_bound(s.t.begin(), s.t.end(), t);
    const auto i = static_cast<std::size_t>(it - s.t.begin());
    const double w = (t - s.t[i - 1]) / (s.t[i] - s.t[i - 1]);
    return s.v[i - 1] + w * (s.v[i] - s.v[i - 1]);
}

SampledSeries device_stream(const DeviceModel& dm, const Timeline& tl, const GroundTruth& gt, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z(0.0, 1.0);
    SampledSeries out;
    out.unit = Unit::bpm;
    out.source = Source::device;
    double e = 0.0;
    bool first = true;
    const double innov = std::sqrt(std::max(0.0, 1.0 - dm.noise_ar * dm.noise_ar));
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * dm.interval_s;
        if (t >= tl.end) break;
        const auto s = static_cast<std::size_t>(tl.state_at(t));
        const double speed = tl.speed_at(t);
        const double cpm = expected_cpm_at(speed);
        double bias = dm.bias_bpm[s];
        if (s == static_cast<std::size_t>(ActivityState::IS)) bias += dm.bias_per_step_rate * cadence_spm(speed);
        const double sd = dm.noise_sd_bpm[s] + dm.ma_gain * cpm / 1000.0;
        const double draw = z(rng);
        e = first ? sd * draw : dm.noise_ar * e + innov * sd * draw;
        first = false;
        out.push_back(t, std::max(30.0, truth_at(gt, t - dm.lag_s) + bias + e));
    }
    return out;
}

}  // namespace

void CohortConfig::validate() const {
    if (n_participants < 1) throw ConfigError("cohort needs at least one participant");
    if (!(fs_ecg > 40.0)) throw ConfigError("fs_ecg must exceed 40 Hz");
    if (!(fs_acc >= 20.0)) throw ConfigError("fs_acc must be at least 20 Hz");
    if (!(rs_min > 0.0) || !(ls_min_low > 0.0) || ls_min_high < ls_min_low)
        throw ConfigError("state durations must be positive with ls_min_low <= ls_min_high");
    if (is_speeds_kmh.empty() || is_speeds_kmh.size() != is_segment_min.size())
        throw ConfigError("IS speeds and segment durations must be non-empty and of equal length");
    for (double m : is_segment_min)
        if (!(m > 0.0)) throw ConfigError("IS segment durations must be positive");
    for (double v : is_speeds_kmh)
        if (v < 0.0) throw ConfigError("treadmill speeds must be non-negative");
    auto check = [](const DeviceModel& d) {
        for (double s : d.noise_sd_bpm)
            if (s < 0.0) throw ConfigError("device noise sd must be non-negative");
        if (!(d.interval_s > 0.0) || d.lag_s < 0.0 || d.ma_gain < 0.0 || std::abs(d.noise_ar) >= 1.0)
            throw ConfigError("invalid device model '" + d.name + "'");
    };
    check(device);
    for (const auto& d : extra_devices) check(d);
}

double cadence_spm(double speed_kmh) { return speed_kmh > 0.0 ? 55.0 + 13.5 * speed_kmh : 0.0; }

double motion_amplitude_g(double speed_kmh) {
    return speed_kmh > 0.0 ? 0.012 * std::pow(speed_kmh, 1.6) : 0.0;
}

double truth_at(const GroundTruth& truth, double t) { return interp(truth.true_hr, t); }

SyntheticParticipant generate_participant(const CohortConfig& cfg, int index) {
    cfg.validate();
    std::mt19937_64 rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(index)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    SyntheticParticipant out;
    auto& s = out.session;
    auto& gt = out.truth;

    char id[16];
    std::snprintf(id, sizeof id, "P%02d", index + 1);
    s.profile.id = id;
    s.profile.gender = unif(rng) < 0.5 ? Gender::male : Gender::female;
    s.profile.bmi = std::round(std::clamp(23.5 + 3.0 * gauss(rng), 17.0, 35.0) * 10.0) / 10.0;
    s.profile.psqi = 1 + static_cast<int>(unif(rng) * 12.0);
    s.fs_ecg = cfg.fs_ecg;
    s.fs_acc = cfg.fs_acc;
    gt.participant = s.profile.id;

    Timeline tl;
    tl.rs_end = cfg.rs_min * 60.0;
    const double ls_min = std::round(cfg.ls_min_low + (cfg.ls_min_high - cfg.ls_min_low) * unif(rng));
    tl.ls_end = tl.rs_end + ls_min * 60.0;
    double t0 = tl.ls_end;
    for (std::size_t k = 0; k < cfg.is_speeds_kmh.size(); ++k) {
        tl.seg_start.push_back(t0);
        t0 += cfg.is_segment_min[k] * 60.0;
    }
    tl.end = t0;
    tl.speeds = cfg.is_speeds_kmh;
    tl.ramp_s = cfg.speed_ramp_s;
    s.schedule = {{ActivityState::RS, 0.0, tl.rs_end},
                  {ActivityState::LS, tl.rs_end, tl.ls_end},
                  {ActivityState::IS, tl.ls_end, tl.end}};

    // Heart-rate targets.
    const double fit = gauss(rng);
    gt.fitness_offset = fit;
    const double hr_rs = 65.0 + 10.0 * unif(rng) - 2.0 * fit;
    const double hr_ls = 55.0 + 10.0 * unif(rng) - 2.0 * fit;
    const double hr_is_rest = hr_rs + 5.0 * unif(rng);
    const double hr_peak = std::clamp(150.0 + 30.0 * unif(rng) - 6.0 * fit, 130.0, 185.0);
    auto target = [&](double t) {
        switch (tl.state_at(t)) {
            case ActivityState::RS: return hr_rs;
            case ActivityState::LS: return hr_ls;
            case ActivityState::IS: break;
        }
        const double v = tl.speed_at(t);
        return hr_is_rest + (hr_peak - hr_is_rest) * std::pow(v / 8.0, 1.4);
    };

    // First-order response with a slow AR(1) drift.
    const double dt = 1.0 / kTruthHz;
    gt.true_hr.unit = Unit::bpm;
    gt.true_hr.source = Source::derived;
    double hr = hr_rs, drift = 0.0;
    const double drift_a = std::exp(-dt / 60.0);
    const double drift_sd = 1.5 * std::sqrt(1.0 - drift_a * drift_a);
    for (long k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (t > tl.end) break;
        gt.true_hr.push_back(t, hr);
        drift = drift_a * drift + drift_sd * gauss(rng);
        const double goal = target(t) + drift;
        const double tau = goal > hr ? 25.0 : 40.0;
        const double step = std::clamp((goal - hr) * (1.0 - std::exp(-dt / tau)), -kMaxSlope * dt, kMaxSlope * dt);
        hr = std::clamp(hr + step, kMinHr, kMaxHr);
    }

    // 1 Hz intensity traces.
    for (long k = 0; static_cast<double>(k) < tl.end; ++k) {
        const double t = static_cast<double>(k);
        const double v = tl.speed_at(t);
        gt.speed_kmh.push_back(t, v);
        gt.expected_cpm.push_back(t, expected_cpm_at(v));
    }
    gt.expected_cpm.unit = Unit::cpm;

    // ECG: beats placed by integrating the instantaneous rate.
    {
        std::mt19937_64 ecg_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(index), 101));
        std::normal_distribution<double> noise(0.0, cfg.ecg_noise_mv);
        const auto n = static_cast<std::size_t>(std::floor(tl.end * cfg.fs_ecg));
        s.ecg.unit = Unit::mV;
        s.ecg.source = Source::ecg;
        s.ecg.t.resize(n);
        s.ecg.v.assign(n, 0.0);
        std::vector<double> beats;
        double phase = 0.3;
        const double h = 1.0 / cfg.fs_ecg;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * h;
            s.ecg.t[i] = t;
            const double inc = truth_at(gt, t) / 60.0 * h;
            if (phase + inc >= 1.0) beats.push_back(t + (1.0 - phase) / inc * h);
            phase = std::fmod(phase + inc, 1.0);
        }
        const auto span = static_cast<long>(std::ceil(0.06 * cfg.fs_ecg));
        const auto tspan = static_cast<long>(std::ceil(0.12 * cfg.fs_ecg));
        for (double b : beats) {
            const auto c = static_cast<long>(std::llround(b * cfg.fs_ecg));
            for (long i = std::max(0L, c - span); i <= std::min(static_cast<long>(n) - 1, c + span); ++i)
                s.ecg.v[static_cast<std::size_t>(i)] += qrs(s.ecg.t[static_cast<std::size_t>(i)] - b);
            // Broad T wave, outside the QRS band.
            const double tw = b + 0.25;
            const auto ct = static_cast<long>(std::llround(tw * cfg.fs_ecg));
            for (long i = std::max(0L, ct - tspan); i <= std::min(static_cast<long>(n) - 1, ct + tspan); ++i) {
                const double u = (s.ecg.t[static_cast<std::size_t>(i)] - tw) / 0.04;
                s.ecg.v[static_cast<std::size_t>(i)] += 0.3 * std::exp(-0.5 * u * u);
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            s.ecg.v[i] += 0.1 * std::sin(2.0 * std::numbers::pi * 0.25 * s.ecg.t[i]) + noise(ecg_rng);
    }

    // Accelerometer: vertical oscillation at the step frequency.
    {
        std::mt19937_64 acc_rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(index), 202));
        std::normal_distribution<double> noise(0.0, 0.003);
        const auto n = static_cast<std::size_t>(std::floor(tl.end * cfg.fs_acc));
        const double h = 1.0 / cfg.fs_acc;
        double phase = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * h;
            const double v = tl.speed_at(t);
            const double a = motion_amplitude_g(v);
            phase = std::fmod(phase + cadence_spm(v) / 60.0 * h, 2.0);
            const bool lying = tl.state_at(t) == ActivityState::LS;
            const double osc = a * std::sin(2.0 * std::numbers::pi * phase);
            const double sway = 0.3 * a * std::sin(std::numbers::pi * phase);
            s.accel.t.push_back(t);
            s.accel.x.push_back((lying ? 1.0 : 0.0) + sway + noise(acc_rng));
            s.accel.y.push_back((lying ? 0.0 : 1.0) + osc + noise(acc_rng));
            s.accel.z.push_back(0.1 * osc + noise(acc_rng));
        }
    }

    // Cumulative steps and device PAL, once per interval.
    {
        s.steps.unit = Unit::steps;
        s.steps.source = Source::device;
        s.device_pal.unit = Unit::level;
        s.device_pal.source = Source::device;
        double total = 0.0;
        long sec = 0;
        const auto& scheme = activity::crouter_va();
        for (long k = 0;; ++k) {
            const double t = static_cast<double>(k) * cfg.step_interval_s;
            if (t >= tl.end) break;
            for (; static_cast<double>(sec) < t; ++sec) total += cadence_spm(tl.speed_at(static_cast<double>(sec))) / 60.0;
            s.steps.push_back(t, std::floor(total));
        }
        for (long k = 0;; ++k) {
            const double t = static_cast<double>(k) * 60.0;
            if (t + 60.0 > tl.end) break;
            double cpm = 0.0;
            for (int j = 0; j < 60; ++j) cpm += expected_cpm_at(tl.speed_at(t + j)) / 60.0;
            s.device_pal.push_back(t, static_cast<double>(activity::classify_pal(cpm, scheme)));
        }
    }

    s.device_hr = device_stream(cfg.device, tl, gt, mix_seed(cfg.seed, static_cast<std::uint64_t>(index), 303));
    for (std::size_t d = 0; d < cfg.extra_devices.size(); ++d)
        s.extra_devices.push_back({cfg.extra_devices[d].name,
                                   device_stream(cfg.extra_devices[d], tl, gt,
                                                 mix_seed(cfg.seed, static_cast<std::uint64_t>(index), 404 + d))});
    return out;
}

std::vector<SyntheticParticipant> generate_cohort(const CohortConfig& cfg, int jobs) {
    cfg.validate();
    std::vector<SyntheticParticipant> out(static_cast<std::size_t>(cfg.n_participants));
    parallel_for(out.size(), jobs, [&](std::size_t i) { out[i] = generate_participant(cfg, static_cast<int>(i)); });
    return out;
}

SessionRecord inject_known_miscalibration(const SessionRecord& session, const GroundTruth& truth,
                                          const ProfileFn& profile_fn) {
    SessionRecord out = session;
    for (std::size_t i = 0; i < out.device_hr.size(); ++i) {
        const double t = out.device_hr.t[i];
        const auto st = hrcal::state_at(session.schedule, t);
        if (!st) continue;
        DeviceContext ctx{t, session.device_hr.v[i], truth_at(truth, t), interp(truth.expected_cpm, t), *st};
        out.device_hr.v[i] = profile_fn(ctx);
    }
    return out;
}

}  // namespace hrcal::synth
