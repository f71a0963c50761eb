#include <cmath>

#include <gtest/gtest.h>

#include "hrcal/activity.hpp"
#include "hrcal/errors.hpp"

using namespace hrcal;
using activity::PalLevel;

TEST(PalCutPoints, Boundaries) {
    using activity::classify_pal;
    EXPECT_EQ(classify_pal(35, activity::crouter_va()), PalLevel::SED);
    EXPECT_EQ(classify_pal(36, activity::crouter_va()), PalLevel::LPA);
    EXPECT_EQ(classify_pal(1129, activity::crouter_va()), PalLevel::MPA);
    EXPECT_EQ(classify_pal(1130, activity::crouter_va()), PalLevel::VPA);
    EXPECT_EQ(classify_pal(100, activity::crouter_vm()), PalLevel::SED);
    EXPECT_EQ(classify_pal(101, activity::crouter_vm()), PalLevel::LPA);
    EXPECT_EQ(classify_pal(2019, activity::troiano_va()), PalLevel::LPA);
    EXPECT_EQ(classify_pal(2020, activity::troiano_va()), PalLevel::MPA);
    EXPECT_EQ(classify_pal(5724, activity::freedson_va()), PalLevel::MPA);
    EXPECT_EQ(classify_pal(5725, activity::freedson_va()), PalLevel::VPA);
}

TEST(PalCutPoints, MonotoneInCounts) {
    for (const auto& s : activity::all_schemes()) {
        int prev = 0;
        for (int c = 0; c <= 10000; ++c) {
            const int level = static_cast<int>(activity::classify_pal(c, s));
            EXPECT_GE(level, prev);
            prev = level;
        }
    }
}

TEST(PalCutPoints, NegativeCountsRejected) {
    EXPECT_THROW(activity::classify_pal(-1, activity::crouter_va()), DomainError);
    EXPECT_THROW(activity::scheme_by_name("nope"), ConfigError);
}

TEST(Counts, StillSensorGivesZero) {
    TriaxialSeries a;
    for (int i = 0; i < 32 * 180; ++i) {
        a.t.push_back(i / 32.0);
        a.x.push_back(0.0);
        a.y.push_back(1.0);
        a.z.push_back(0.0);
    }
    const auto c = activity::compute_counts(a, activity::AxisMode::VA);
    ASSERT_EQ(c.size(), 3u);
    for (double v : c.v) EXPECT_NEAR(v, 0.0, 1e-6);
}

TEST(Counts, GrowWithAmplitudeAndVmDominatesVa) {
    auto make = [](double amp) {
        TriaxialSeries a;
        for (int i = 0; i < 32 * 120; ++i) {
            const double t = i / 32.0;
            a.t.push_back(t);
            a.x.push_back(0.3 * amp * std::sin(2 * M_PI * 1.5 * t));
            a.y.push_back(1.0 + amp * std::sin(2 * M_PI * 1.5 * t));
            a.z.push_back(0.0);
        }
        return a;
    };
    const auto lo = activity::compute_counts(make(0.05), activity::AxisMode::VA);
    const auto hi = activity::compute_counts(make(0.2), activity::AxisMode::VA);
    const auto vm = activity::compute_counts(make(0.2), activity::AxisMode::VM);
    EXPECT_GT(hi.v[1], 3.0 * lo.v[1]);
    EXPECT_GE(vm.v[1], hi.v[1]);
}

TEST(StepsPerMinute, DeltaOverInterval) {
    SampledSeries s;
    s.push_back(0, 0);
    s.push_back(60, 100);
    s.push_back(90, 160);
    const auto r = activity::steps_per_minute(s);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_DOUBLE_EQ(r.t[0], 60);
    EXPECT_DOUBLE_EQ(r.v[0], 100);
    EXPECT_DOUBLE_EQ(r.v[1], 120);
}
