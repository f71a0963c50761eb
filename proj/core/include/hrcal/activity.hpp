#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "hrcal/series.hpp"

namespace hrcal::activity {

enum class AxisMode { VA, VM };

enum class PalLevel { SED = 0, LPA = 1, MPA = 2, VPA = 3 };

std::string_view to_string(PalLevel level);

// Cut-points as the inclusive upper bound (cpm) of SED, LPA and MPA; anything
// above the third bound is VPA.
struct PalScheme {
    std::string name;
    AxisMode axis_mode;
    std::array<double, 3> upper;
};

// Wrist and hip actigraphy cut-points in counts per minute:
//   scheme        SED     LPA        MPA         VPA
//   Crouter VA    <=35    36-360     361-1129    >=1130
//   Crouter VM    <=100   101-609    610-1809    >=1810
//   Freedson VA   <=99    100-759    760-5724    >=5725
//   Troiano VA    <=100   101-2019   2020-5998   >=5999
const PalScheme& crouter_va();
const PalScheme& crouter_vm();
const PalScheme& freedson_va();
const PalScheme& troiano_va();
const std::vector<PalScheme>& all_schemes();

// Accepts crouter_va | crouter_vm | freedson_va | troiano_va.
const PalScheme& scheme_by_name(std::string_view name);

PalLevel classify_pal(double cpm, const PalScheme& scheme);

struct CountConfig {
    double low_hz = 0.25;
    double high_hz = 2.5;
    int order = 2;
    double counts_per_g_s = 128.0;
    double epoch_s = 1.0;
};

// Activity counts per minute. Each axis is band-passed (zero phase),
// VA takes |y| and VM takes the magnitude of the three band-passed axes; the
// rectified signal is integrated over 1 s epochs, scaled, and summed per
// minute. Minutes are anchored at the first sample; a partial trailing minute
// is dropped. Output timestamps are minute starts.
SampledSeries compute_counts(const TriaxialSeries& accel, AxisMode mode, const CountConfig& cfg = {});

// Steps per minute from a cumulative count: each consecutive pair yields
// (t_{i+1}, 60 * delta / dt).
SampledSeries steps_per_minute(const SampledSeries& cumulative);

}  // namespace hrcal::activity
