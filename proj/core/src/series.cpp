#include "hrcal/series.hpp"

#include <algorithm>

#include "hrcal/errors.hpp"

namespace hrcal {

std::string_view to_string(Unit u) {
    switch (u) {
        case Unit::mV: return "mV";
        case Unit::bpm: return "bpm";
        case Unit::g: return "g";
        case Unit::cpm: return "cpm";
        case Unit::steps_per_min: return "steps/min";
        case Unit::steps: return "steps";
        case Unit::level: return "level";
    }
    return "?";
}

std::string_view to_string(Source s) {
    switch (s) {
        case Source::ecg: return "ecg";
        case Source::device: return "device";
        case Source::derived: return "derived";
    }
    return "?";
}

std::string_view to_string(ActivityState s) {
    switch (s) {
        case ActivityState::RS: return "RS";
        case ActivityState::LS: return "LS";
        case ActivityState::IS: return "IS";
    }
    return "?";
}

std::string_view to_string(StateTag s) {
    switch (s) {
        case StateTag::RS: return "RS";
        case StateTag::LS: return "LS";
        case StateTag::IS: return "IS";
        case StateTag::ALL: return "ALL";
    }
    return "?";
}

std::string_view to_string(Gender g) { return g == Gender::male ? "male" : "female"; }

ActivityState parse_activity_state(std::string_view s) {
    if (s == "RS") return ActivityState::RS;
    if (s == "LS") return ActivityState::LS;
    if (s == "IS") return ActivityState::IS;
    throw ValidationError("unknown activity state '" + std::string(s) + "'");
}

StateTag parse_state_tag(std::string_view s) {
    if (s == "ALL" || s == "All" || s == "all") return StateTag::ALL;
    return tag_of(parse_activity_state(s));
}

StateTag tag_of(ActivityState s) {
    switch (s) {
        case ActivityState::RS: return StateTag::RS;
        case ActivityState::LS: return StateTag::LS;
        case ActivityState::IS: return StateTag::IS;
    }
    return StateTag::ALL;
}

bool tag_contains(StateTag tag, ActivityState s) { return tag == StateTag::ALL || tag == tag_of(s); }

std::optional<ActivityState> state_at(const Schedule& schedule, double t) {
    auto it = std::upper_bound(schedule.begin(), schedule.end(), t,
                               [](double x, const ScheduleEntry& e) { return x < e.t_start; });
    if (it == schedule.begin()) return std::nullopt;
    --it;
    if (t < it->t_end) return it->state;
    return std::nullopt;
}

}  // namespace hrcal
