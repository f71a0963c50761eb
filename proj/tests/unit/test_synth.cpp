#include <cmath>

#include <gtest/gtest.h>

#include "hrcal/errors.hpp"
#include "hrcal/synth.hpp"

using namespace hrcal;

namespace {

synth::CohortConfig short_config() {
    synth::CohortConfig cfg;
    cfg.n_participants = 2;
    cfg.rs_min = 3;
    cfg.ls_min_low = cfg.ls_min_high = 3;
    cfg.is_speeds_kmh = {0, 5};
    cfg.is_segment_min = {2, 2};
    return cfg;
}

}  // namespace

TEST(Synth, DeterministicPerIndex) {
    const auto cfg = short_config();
    const auto a = synth::generate_participant(cfg, 1);
    const auto b = synth::generate_participant(cfg, 1);
    EXPECT_EQ(a.session.profile.id, "P02");
    EXPECT_EQ(a.session.ecg.v, b.session.ecg.v);
    EXPECT_EQ(a.session.device_hr.v, b.session.device_hr.v);
    const auto c = synth::generate_participant(cfg, 0);
    EXPECT_NE(a.session.device_hr.v, c.session.device_hr.v);
}

TEST(Synth, ScheduleCoversProtocol) {
    const auto p = synth::generate_participant(short_config(), 0);
    ASSERT_EQ(p.session.schedule.size(), 3u);
    EXPECT_EQ(p.session.schedule[0].state, ActivityState::RS);
    EXPECT_NEAR(p.session.schedule[0].t_end - p.session.schedule[0].t_start, 180.0, 1e-9);
    EXPECT_NEAR(p.session.schedule[2].t_end - p.session.schedule[2].t_start, 240.0, 1e-9);
    for (double v : p.truth.true_hr.v) {
        EXPECT_GT(v, 40.0);
        EXPECT_LT(v, 200.0);
    }
}

TEST(Synth, MotionModelMonotone) {
    EXPECT_EQ(synth::cadence_spm(0.0), 0.0);
    EXPECT_LT(synth::cadence_spm(2.0), synth::cadence_spm(8.0));
    EXPECT_LT(synth::motion_amplitude_g(2.0), synth::motion_amplitude_g(8.0));
}

TEST(Synth, InvalidConfigRejected) {
    auto cfg = short_config();
    cfg.is_segment_min = {1};
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = short_config();
    cfg.n_participants = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Synth, InjectionReplacesOnlyDevice) {
    const auto p = synth::generate_participant(short_config(), 0);
    const auto s = synth::inject_known_miscalibration(p.session, p.truth, [](const synth::DeviceContext& c) {
        return c.true_bpm + (c.state == ActivityState::IS ? 5.0 : 0.0);
    });
    ASSERT_EQ(s.device_hr.size(), p.session.device_hr.size());
    EXPECT_EQ(s.ecg.v, p.session.ecg.v);
    for (std::size_t i = 0; i < s.device_hr.size(); ++i) {
        const auto st = state_at(s.schedule, s.device_hr.t[i]);
        const double expect = synth::truth_at(p.truth, s.device_hr.t[i]) + (st == ActivityState::IS ? 5.0 : 0.0);
        EXPECT_NEAR(s.device_hr.v[i], expect, 1e-9);
    }
}
