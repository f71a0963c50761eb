#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hrcal/errors.hpp"
#include "hrcal/filter.hpp"
#include "hrcal/signal.hpp"
#include "oracles.hpp"

using namespace hrcal;

TEST(Butterworth, LowpassMatchesAnalogPrototype) {
    for (int order : {1, 2, 4}) {
        const auto sos = dsp::butter_lowpass(order, 0.1, 4.0);
        for (double f : {0.0, 0.02, 0.1, 0.5, 1.5}) {
            EXPECT_NEAR(dsp::magnitude_response(sos, f, 4.0), oracle::butter_lowpass_gain(order, 0.1, 4.0, f), 1e-9)
                << "order " << order << " f " << f;
        }
    }
}

TEST(Butterworth, BandpassMatchesAnalogPrototype) {
    const auto sos = dsp::butter_bandpass(4, 15.0, 20.0, 250.0);
    for (double f : {1.0, 10.0, 15.0, 17.3, 20.0, 30.0, 100.0}) {
        EXPECT_NEAR(dsp::magnitude_response(sos, f, 250.0), oracle::butter_bandpass_gain(4, 15.0, 20.0, 250.0, f),
                    1e-8)
            << f;
    }
}

TEST(Butterworth, FiltfiltPassesConstant) {
    const auto sos = dsp::butter_lowpass(2, 0.1, 4.0);
    std::vector<double> x(400, 72.0);
    for (double v : dsp::sosfiltfilt(sos, x)) EXPECT_NEAR(v, 72.0, 1e-8);
}

TEST(Bandpass, RejectsLowSamplingRate) {
    SampledSeries s;
    for (int i = 0; i < 100; ++i) s.push_back(i / 30.0, 0.0);
    EXPECT_THROW(signal::bandpass_ecg(s), ConfigError);
}

TEST(RrToHr, OneSamplePerInterval) {
    const auto hr = signal::rr_to_hr({0.0, 1.0, 1.5, 2.5});
    ASSERT_EQ(hr.size(), 3u);
    EXPECT_DOUBLE_EQ(hr.series.t[0], 1.0);
    EXPECT_DOUBLE_EQ(hr.series.v[0], 60.0);
    EXPECT_DOUBLE_EQ(hr.series.v[1], 120.0);
}

TEST(DropImplausible, KeepsOpenBand) {
    signal::HeartRateSeries hr;
    for (double v : {15.0, 20.0, 60.0, 250.0, 300.0}) hr.series.push_back(hr.series.size(), v);
    const auto kept = signal::drop_implausible(hr);
    ASSERT_EQ(kept.size(), 1u);
    EXPECT_EQ(kept.series.v[0], 60.0);
}

TEST(ResampleUniform, LinearInterpolation) {
    signal::HeartRateSeries hr;
    hr.series.push_back(0.0, 60.0);
    hr.series.push_back(1.0, 70.0);
    const auto r = signal::resample_uniform(hr, 4.0);
    ASSERT_EQ(r.size(), 5u);
    EXPECT_NEAR(r.series.v[1], 62.5, 1e-12);
    EXPECT_NEAR(r.series.t[4], 1.0, 1e-12);
}

TEST(AlignToGrid, NearestWithinToleranceEarlierWins) {
    signal::HeartRateSeries hr;
    hr.series.push_back(14.0, 1.0);
    hr.series.push_back(16.0, 2.0);
    hr.series.push_back(33.0, 3.0);
    const auto g = signal::align_to_grid(hr, 15.0, 2.0);
    ASSERT_EQ(g.size(), 1u);
    EXPECT_EQ(g.series.t[0], 15.0);
    EXPECT_EQ(g.series.v[0], 1.0);
}

TEST(ShiftByState, DelaysAndDropsOutsideSchedule) {
    signal::HeartRateSeries hr;
    for (int i = 0; i < 30; ++i) hr.series.push_back(i, 60.0 + i);
    const Schedule sched{{ActivityState::RS, 0.0, 10.0}, {ActivityState::IS, 10.0, 20.0}};
    const auto s = signal::shift_by_state(hr, sched, {5.0, 0.0, 1.0});
    // IS samples at 10..13 land on or before the last RS output and are dropped
    ASSERT_EQ(s.size(), 16u);
    EXPECT_EQ(s.series.t.front(), 5.0);
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GT(s.series.t[i], s.series.t[i - 1]);
}

TEST(ShiftByState, CollisionKeepsEarlierSample) {
    signal::HeartRateSeries hr;
    for (int i = 0; i < 20; ++i) hr.series.push_back(i, i);
    const Schedule sched{{ActivityState::RS, 0.0, 10.0}, {ActivityState::LS, 10.0, 20.0}};
    const auto s = signal::shift_by_state(hr, sched, {5.0, 0.0, 0.0});
    for (std::size_t i = 1; i < s.size(); ++i) EXPECT_GT(s.series.t[i], s.series.t[i - 1]);
}

TEST(PeakDetection, FindsSyntheticBeats) {
    const double fs = 250.0;
    SampledSeries ecg;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> beats;
    for (double t = 0.5; t < 60.0; t += 0.8 + 0.05 * std::sin(t)) beats.push_back(t);
    for (int i = 0; i < static_cast<int>(60 * fs); ++i) {
        const double t = i / fs;
        double v = noise(rng);
        for (double b : beats) {
            const double d = (t - b) / 0.01;
            if (std::abs(d) < 8) v += -d * std::exp(-0.5 * d * d);
        }
        ecg.push_back(t, v);
    }
    const auto peaks = signal::detect_r_peaks(signal::bandpass_ecg(ecg));
    std::size_t matched = 0;
    for (double b : beats)
        for (double p : peaks)
            if (std::abs(p - b) < 0.05) {
                ++matched;
                break;
            }
    EXPECT_GE(matched + 2, beats.size());
    EXPECT_LE(peaks.size(), beats.size() + 2);
}
