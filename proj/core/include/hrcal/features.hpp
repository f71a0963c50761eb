#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hrcal/activity.hpp"
#include "hrcal/series.hpp"
#include "hrcal/signal.hpp"

namespace hrcal::features {

// Rows on the 15 s grid with named feature columns, the ECG-derived target,
// and row provenance (participant, state, time). `baseline` keeps the raw
// device HR of each row so calibrated and raw errors stay paired.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    explicit FeatureMatrix(std::vector<std::string> columns);

    const std::vector<std::string>& columns() const noexcept { return columns_; }
    std::size_t rows() const noexcept { return target_.size(); }
    std::size_t cols() const noexcept { return columns_.size(); }
    bool empty() const noexcept { return target_.empty(); }

    std::size_t column_index(std::string_view name) const;
    bool has_column(std::string_view name) const;

    double at(std::size_t r, std::size_t c) const { return values_[r * columns_.size() + c]; }
    double& at(std::size_t r, std::size_t c) { return values_[r * columns_.size() + c]; }
    std::span<const double> row(std::size_t r) const {
        return {values_.data() + r * columns_.size(), columns_.size()};
    }
    std::vector<double> column(std::size_t c) const;
    std::vector<double> column(std::string_view name) const { return column(column_index(name)); }

    const std::vector<double>& target() const noexcept { return target_; }
    const std::vector<double>& baseline() const noexcept { return baseline_; }
    const std::vector<double>& time() const noexcept { return time_; }
    const std::vector<ActivityState>& state() const noexcept { return state_; }
    const std::vector<std::string>& participant() const noexcept { return participant_; }

    void append_row(std::span<const double> values, double target, double baseline, double time,
                    ActivityState state, const std::string& participant);

    FeatureMatrix select_rows(const std::vector<std::size_t>& rows) const;
    FeatureMatrix select_columns(const std::vector<std::string>& names) const;
    FeatureMatrix filter_state(StateTag tag) const;
    FeatureMatrix filter_participants(const std::set<std::string>& ids) const;
    FeatureMatrix exclude_participants(const std::set<std::string>& ids) const;

    // Distinct participant ids in first-appearance order.
    std::vector<std::string> participant_ids() const;

    // Row-wise concatenation; column lists must match.
    void append(const FeatureMatrix& other);

private:
    std::vector<std::string> columns_;
    std::vector<double> values_;
    std::vector<double> target_;
    std::vector<double> baseline_;
    std::vector<double> time_;
    std::vector<ActivityState> state_;
    std::vector<std::string> participant_;
};

// Categorical columns get the discrete mutual-information estimator. Lagged
// copies of a categorical column ("pal[t-3]") are categorical too.
bool is_categorical(std::string_view column);

// Signals of one session resampled for assembly.
struct ProcessedSession {
    ParticipantProfile profile;
    Schedule schedule;
    SampledSeries truth;        // grid-aligned, shifted ECG HR
    SampledSeries device;       // grid-aligned device HR
    SampledSeries cpm_va;       // minute counts, y axis
    SampledSeries cpm_vm;       // minute counts, vector magnitude
    SampledSeries step_rate;    // (t_end, steps/min) per cumulative interval
    double step_origin = 0.0;   // start of the first step interval
    SampledSeries device_pal;   // device-reported level per minute
};

struct ProcessingConfig {
    signal::ExtractionConfig extraction;
    activity::CountConfig counts;
    double device_grid_tolerance_s = 2.0;
};

ProcessedSession process_session(const SessionRecord& session, const ProcessingConfig& cfg);

// A device HR stream (primary or extra) aligned on the grid, for validation.
SampledSeries grid_device(const SampledSeries& device_hr, const ProcessingConfig& cfg);

struct AssemblyConfig {
    // device | crouter_va | crouter_vm | freedson_va | troiano_va
    std::string pal_source = "device";
    // Extra PAL columns from accelerometer schemes, named fusion_pal_<scheme>.
    std::vector<std::string> fusion_schemes;
};

// Standard candidate columns: device_hr, pal, step_rate, gender, psqi, bmi.
std::vector<std::string> base_columns(const AssemblyConfig& cfg);

// One row per grid point with a target and every feature present. Gender is
// coded male=0, female=1; PAL ordinal 0..3.
FeatureMatrix assemble_matrix(const std::vector<ProcessedSession>& sessions, const AssemblyConfig& cfg);

// ---------------------------------------------------------------------------
// Feature tests

struct FTestResult {
    double f_statistic;
    double p_value;
};

// Univariate linear regression test: F = r^2 / (1 - r^2) * (n - 2) against
// F(1, n - 2). Throws DegenerateFeatureError for constant x (or y).
FTestResult f_test(std::span<const double> x, std::span<const double> y);

// k-nearest-neighbour mutual information in nats. Continuous x uses the
// Kraskov estimator with the max-norm; discrete x uses Ross's
// discrete-continuous estimator. Both columns are standardised and jittered
// by 1e-10 (seeded) to break ties. Negative estimates are clamped to 0.
double mutual_information(std::span<const double> x, std::span<const double> y, int k = 3,
                          bool discrete_x = false, std::uint64_t seed = 0);

struct FeatureTest {
    std::string feature;
    StateTag state;
    double f_statistic = 0.0;
    double p_value = 1.0;
    double mi_nats = 0.0;
    bool degenerate = false;
    bool linear_pass = false;
    bool mi_pass = false;
    bool selected = false;
};

struct SelectionConfig {
    double p_threshold = 0.05;
    double mi_threshold = 0.3;
    int mi_neighbors = 3;
    std::uint64_t seed = 0;
};

// Tests every column of `m` against its target (all rows belong to `state`).
std::vector<FeatureTest> test_features(const FeatureMatrix& m, StateTag state, const SelectionConfig& cfg);

struct SelectionReport {
    std::vector<FeatureTest> tests;

    std::vector<std::string> selected(StateTag state) const;
    const FeatureTest& find(std::string_view feature, StateTag state) const;
};

// Runs test_features per RS, LS, IS and ALL.
SelectionReport select_features(const FeatureMatrix& m, const SelectionConfig& cfg);

// Per-fold reports summarised as mean and SE across folds.
struct AggregatedTest {
    std::string feature;
    StateTag state;
    double f_mean = 0.0;
    double p_mean = 1.0;
    double p_se = 0.0;
    double mi_mean = 0.0;
    double mi_se = 0.0;
    int folds_selected = 0;
    int folds = 0;
    bool linear_pass = false;
    bool mi_pass = false;
    bool selected = false;
};

std::vector<AggregatedTest> aggregate_selection(const std::vector<SelectionReport>& folds,
                                                const SelectionConfig& cfg);

// CSV columns: feature,state,f_statistic,p_value,p_value_se,mi_nats,
// mi_nats_se,linear,mi,selected,folds_selected,folds.
std::string selection_csv(const std::vector<AggregatedTest>& rows);

// ---------------------------------------------------------------------------
// Standardisation

struct ScalerStats {
    std::vector<std::string> columns;
    std::vector<double> mean;
    std::vector<double> sd;
    std::vector<bool> constant;  // passed through unscaled
};

ScalerStats fit_scaler(const FeatureMatrix& train, bool population_sd = true);
FeatureMatrix apply_scaler(const ScalerStats& stats, const FeatureMatrix& m);
void apply_scaler_inplace(const ScalerStats& stats, std::span<double> row);

// ---------------------------------------------------------------------------
// Rolling windows

struct WindowSpec {
    int size_points = 10;
    double cadence_s = 15.0;
    std::vector<std::string> rolled_columns{"device_hr", "pal", "step_rate"};
};

std::string lag_name(std::string_view column, int lag);

// Rows are grouped per participant and split into segments wherever the
// time step differs from the cadence. For every row at index >= w - 1 of a
// segment the output holds col[t - w + 1 .. t] for each rolled column
// (oldest first, named "col[t-k]"/"col[t]") followed by the remaining columns
// at t. Segments shorter than w produce nothing.
FeatureMatrix build_rolling_windows(const FeatureMatrix& m, const WindowSpec& spec);

// Lengths of the contiguous segments build_rolling_windows would see.
std::vector<std::size_t> contiguous_segments(const FeatureMatrix& m, double cadence_s);

}  // namespace hrcal::features
