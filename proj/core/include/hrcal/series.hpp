#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hrcal {

enum class Unit { mV, bpm, g, cpm, steps_per_min, steps, level };
enum class Source { ecg, device, derived };

std::string_view to_string(Unit u);
std::string_view to_string(Source s);

// Timestamped scalar stream. Timestamps are seconds from session start.
struct SampledSeries {
    std::vector<double> t;
    std::vector<double> v;
    Unit unit = Unit::bpm;
    Source source = Source::derived;

    std::size_t size() const noexcept { return t.size(); }
    bool empty() const noexcept { return t.empty(); }
    void push_back(double time, double value) {
        t.push_back(time);
        v.push_back(value);
    }
};

// Three-axis accelerometer stream in g.
struct TriaxialSeries {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> z;

    std::size_t size() const noexcept { return t.size(); }
    bool empty() const noexcept { return t.empty(); }
};

enum class Gender { male, female };

struct ParticipantProfile {
    std::string id;
    Gender gender = Gender::male;
    double bmi = 0.0;
    int psqi = 0;
};

enum class ActivityState { RS, LS, IS };

// Reporting tag: the three protocol states plus their union.
enum class StateTag { RS, LS, IS, ALL };

inline constexpr ActivityState kActivityStates[] = {ActivityState::RS, ActivityState::LS,
                                                    ActivityState::IS};
inline constexpr StateTag kStateTags[] = {StateTag::RS, StateTag::LS, StateTag::IS,
                                          StateTag::ALL};

std::string_view to_string(ActivityState s);
std::string_view to_string(StateTag s);
std::string_view to_string(Gender g);
ActivityState parse_activity_state(std::string_view s);
StateTag parse_state_tag(std::string_view s);
StateTag tag_of(ActivityState s);
bool tag_contains(StateTag tag, ActivityState s);

struct ScheduleEntry {
    ActivityState state;
    double t_start;
    double t_end;
};

using Schedule = std::vector<ScheduleEntry>;

// State in effect at time t, or nullopt outside every interval. Intervals are
// half-open [t_start, t_end).
std::optional<ActivityState> state_at(const Schedule& schedule, double t);

// Additional HR stream recorded alongside the primary device.
struct NamedSeries {
    std::string name;
    SampledSeries series;
};

struct SessionRecord {
    ParticipantProfile profile;
    double fs_ecg = 0.0;
    double fs_acc = 0.0;
    SampledSeries ecg;
    SampledSeries device_hr;
    std::vector<NamedSeries> extra_devices;
    TriaxialSeries accel;
    SampledSeries steps;       // cumulative
    SampledSeries device_pal;  // optional, ordinal 0..3 per device-reported minute
    Schedule schedule;
};

}  // namespace hrcal
