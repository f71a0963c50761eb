#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hrcal/features.hpp"
#include "hrcal/models/model.hpp"
#include "hrcal/series.hpp"

namespace hrcal::eval {

// ---------------------------------------------------------------------------
// Folds

struct Fold {
    std::string test;
    std::string validation;
    std::vector<std::string> train;
};

using FoldPlan = std::vector<Fold>;

// Participant i is the test subject of fold i, the cyclically next one is
// validation and the rest train. Throws ConfigError below 3 participants.
FoldPlan make_folds(const std::vector<std::string>& participant_ids);

// ---------------------------------------------------------------------------
// Statistics

struct StatTestResult {
    double statistic = 0.0;
    double dof1 = 0.0;
    double dof2 = 0.0;  // 0 for single-dof tests
    double p_value = 1.0;
    bool significant = false;
};

struct MeanSe {
    double mean;
    double se;
};

double mae(std::span<const double> pred, std::span<const double> truth);
// Mean |pred - truth| over timestamps present in both series.
double mae(const SampledSeries& pred, const SampledSeries& truth);
// SE from the sample sd of the per-participant values over sqrt(n).
MeanSe mae_se(std::span<const double> per_participant);

// Paired two-tailed t-test on a - b. Zero-variance differences give p = 1
// when the mean difference is 0 and p = 0 otherwise.
StatTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

// One-way repeated-measures ANOVA on a participants x methods matrix.
// Rows containing NaN are dropped; `dropped` receives their count.
StatTestResult rm_anova(const std::vector<std::vector<double>>& matrix, std::size_t* dropped = nullptr);

struct PairwiseRow {
    std::size_t a;
    std::size_t b;
    double mean_diff;  // mean of column a minus column b
    double se;
    StatTestResult test;
};

// Unadjusted paired t-tests between every pair of method columns.
std::vector<PairwiseRow> pairwise_comparisons(const std::vector<std::vector<double>>& matrix);

struct BlandAltman {
    double mean_diff = 0.0;
    double sd_diff = 0.0;
    double loa_low = 0.0;
    double loa_high = 0.0;
    std::size_t n = 0;
    std::size_t n_outside = 0;
};

// Differences a - b, sample sd, limits mean +- 1.96 sd.
BlandAltman bland_altman(std::span<const double> a, std::span<const double> b);

// 100 * (raw - calibrated) / raw. Throws DomainError when raw == 0.
double error_reduction(double mae_raw, double mae_cal);

// ---------------------------------------------------------------------------
// Grid search

// Feature matrices of one fold, already restricted to one state and to the
// model's feature columns.
struct FoldData {
    int fold_id = 0;
    features::FeatureMatrix train;
    features::FeatureMatrix validation;
    features::FeatureMatrix test;
};

struct SpecScore {
    std::string label;
    std::vector<double> fold_mae;  // NaN where the fit failed
    double mean_mae = 0.0;
    double se_mae = 0.0;
    bool failed = false;
    std::string failure;
};

struct GridResult {
    std::vector<SpecScore> scores;    // grid order
    std::size_t best = 0;
    // Test-set predictions of every spec for every fold: [spec][fold].
    std::vector<std::vector<std::vector<double>>> test_predictions;
};

// Lowest mean validation MAE among non-failed specs; ties go to the earlier
// spec. Throws TrainingError when every spec failed.
std::size_t select_best(const std::vector<SpecScore>& scores);

// Fits every spec on every fold's training rows, scores it on the
// validation participant and predicts the test participant. Cells run on
// `jobs` threads; results are reduced in grid order. A spec is marked
// failed when any of its fold fits throws.
GridResult grid_search(const std::vector<models::ModelSpec>& grid, const std::vector<FoldData>& folds, int jobs,
                       std::uint64_t seed);

// ---------------------------------------------------------------------------
// Leave-one-subject-out evaluation

struct MethodConfig {
    std::string name;                    // report row name
    std::vector<models::ModelSpec> grid;
    bool rolling = false;
};

struct EvalConfig {
    features::SelectionConfig selection;
    features::WindowSpec window;
    std::vector<MethodConfig> methods;
    std::vector<ActivityState> states{ActivityState::RS, ActivityState::LS, ActivityState::IS};
    bool force_device_hr = true;  // keep device_hr even if the tests reject it
    int jobs = 1;
    std::uint64_t seed = 0;
};

struct PointPrediction {
    std::string participant;
    ActivityState state;
    double time;
    double truth;
    double raw;
    double calibrated;
};

struct MethodStateResult {
    std::string method;
    StateTag state;
    std::vector<std::string> participants;
    std::vector<double> participant_mae;
    std::vector<double> participant_raw_mae;  // raw device MAE on the same rows
    double mae = 0.0;
    double se = 0.0;
    double raw_mae = 0.0;
    double error_reduction_pct = 0.0;
    std::size_t n_points = 0;
    std::optional<StatTestResult> t_test;     // |raw error| vs |calibrated error|
    std::optional<BlandAltman> agreement;     // method - truth
};

struct EvalReport {
    std::vector<MethodStateResult> rows;  // "device" rows first, then methods in config order

    const MethodStateResult& find(const std::string& method, StateTag state) const;
};

struct GridRow {
    std::string method;
    ActivityState state;
    SpecScore score;
    bool best = false;
};

struct EvalOutputs {
    std::vector<features::SelectionReport> fold_selection;
    std::vector<GridRow> grid;
    EvalReport report;
    std::vector<std::vector<PointPrediction>> predictions;  // per method, config order
    FoldPlan folds;
};

// Per fold: feature selection on the training participants, then per state
// and method a grid search over the training, validation and test
// participants. Throws LeakageError if a test or validation participant
// appears in a training set.
EvalOutputs evaluate_loso(const features::FeatureMatrix& m, const EvalConfig& cfg);

// Builds the report rows from per-point predictions.
MethodStateResult summarize(const std::string& method, StateTag state, const std::vector<PointPrediction>& points);

// ---------------------------------------------------------------------------
// Report files

// Wide layout: method, then for RS, LS, IS, ALL the columns
// <S>_mae,<S>_se,<S>_reduction_pct,<S>_p_value,<S>_sig,<S>_n. A header-only
// file for an empty report. "*" marks a significant reduction.
std::string report_csv(const EvalReport& report);
std::string bland_altman_csv(const EvalReport& report);
std::string grid_csv(const std::vector<GridRow>& rows);
// One row per (participant, state, time) with truth, raw and each method.
std::string timeseries_csv(const std::vector<std::string>& methods,
                           const std::vector<std::vector<PointPrediction>>& predictions);

}  // namespace hrcal::eval
