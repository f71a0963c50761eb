#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hrcal/errors.hpp"
#include "hrcal/eval.hpp"

using namespace hrcal;
using namespace hrcal::eval;

TEST(Folds, CyclicValidationAndDisjoint) {
    const auto plan = make_folds({"A", "B", "C", "D"});
    ASSERT_EQ(plan.size(), 4u);
    EXPECT_EQ(plan[0].test, "A");
    EXPECT_EQ(plan[0].validation, "B");
    EXPECT_EQ(plan[3].validation, "A");
    for (const auto& f : plan) {
        EXPECT_EQ(f.train.size(), 2u);
        for (const auto& t : f.train) {
            EXPECT_NE(t, f.test);
            EXPECT_NE(t, f.validation);
        }
    }
    EXPECT_THROW(make_folds({"A", "B"}), ConfigError);
    EXPECT_THROW(make_folds({"A", "B", "A"}), ConfigError);
}

TEST(Stats, MaeAndSe) {
    const double a[] = {1, 2, 3}, b[] = {0, 0, 0};
    EXPECT_DOUBLE_EQ(mae(a, b), 2.0);
    const auto ms = mae_se(a);
    EXPECT_DOUBLE_EQ(ms.mean, 2.0);
    EXPECT_NEAR(ms.se, 1.0 / std::sqrt(3.0), 1e-12);
}

TEST(Stats, SeriesMaeUsesCommonTimestamps) {
    SampledSeries p, t;
    p.push_back(0, 1);
    p.push_back(15, 5);
    t.push_back(15, 2);
    t.push_back(30, 0);
    EXPECT_DOUBLE_EQ(mae(p, t), 3.0);
}

TEST(Stats, PairedTTestKnownValue) {
    // differences 1, 2, 3, 4: mean 2.5, sd 1.291, t = 3.873, dof 3
    const double a[] = {2, 4, 6, 8}, b[] = {1, 2, 3, 4};
    const auto r = paired_t_test(a, b);
    EXPECT_NEAR(r.statistic, 3.8729833, 1e-6);
    EXPECT_EQ(r.dof1, 3.0);
    EXPECT_NEAR(r.p_value, 0.030466, 1e-5);
    const double c[] = {1, 2, 3};
    EXPECT_EQ(paired_t_test(c, c).p_value, 1.0);
}

TEST(Stats, RmAnovaKnownValue) {
    // 3 subjects x 3 conditions with a clear condition effect
    const std::vector<std::vector<double>> m{{1, 2, 3}, {2, 3, 5}, {1, 3, 4}};
    const auto r = rm_anova(m);
    EXPECT_EQ(r.dof1, 2.0);
    EXPECT_EQ(r.dof2, 4.0);
    // SS_cond = 32/3, SS_subj = 8/3, SS_total = 14, SS_err = 2/3
    EXPECT_NEAR(r.statistic, 32.0, 1e-9);
    EXPECT_NEAR(r.p_value, 0.0034602076, 1e-8);
    std::size_t dropped = 0;
    auto with_nan = m;
    with_nan.push_back({1, NAN, 2});
    rm_anova(with_nan, &dropped);
    EXPECT_EQ(dropped, 1u);
}

TEST(Stats, PairwiseCoversAllPairs) {
    const std::vector<std::vector<double>> m{{1, 2, 3}, {2, 3, 5}, {1, 3, 4}};
    const auto rows = pairwise_comparisons(m);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_NEAR(rows[0].mean_diff, (1 + 2 + 1) / 3.0 - (2 + 3 + 3) / 3.0, 1e-12);
}

TEST(Stats, BlandAltmanLimits) {
    const double a[] = {1, 2, 3, 4}, b[] = {0, 0, 0, 0};
    const auto ba = bland_altman(a, b);
    EXPECT_DOUBLE_EQ(ba.mean_diff, 2.5);
    EXPECT_NEAR(ba.sd_diff, 1.2909944, 1e-6);
    EXPECT_NEAR(ba.loa_high - ba.loa_low, 2 * 1.96 * ba.sd_diff, 1e-12);
    EXPECT_EQ(ba.n, 4u);
}

TEST(Stats, ErrorReduction) {
    EXPECT_NEAR(error_reduction(3.26, 2.17), 33.4355828, 1e-6);
    EXPECT_THROW(error_reduction(0.0, 1.0), DomainError);
}

namespace {

features::FeatureMatrix toy_cohort(int n_participants, int rows_each, std::uint64_t seed) {
    features::FeatureMatrix m({"device_hr", "pal"});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    for (int p = 0; p < n_participants; ++p) {
        const std::string id = "P0" + std::to_string(p + 1);
        for (int i = 0; i < rows_each; ++i) {
            const auto state = kActivityStates[(i * 3) / rows_each];
            const double pal = static_cast<double>(state);
            const double truth = 70 + 25 * pal + 5 * n01(rng);
            const double device = truth - 4 * pal + 2 * n01(rng);
            const double row[] = {device, pal};
            m.append_row(row, truth, device, 15.0 * i, state, id);
        }
    }
    return m;
}

}  // namespace

TEST(GridSearch, LeakageIsRejected) {
    const auto m = toy_cohort(4, 30, 1);
    FoldData f;
    f.train = m.filter_participants({"P01", "P02"});
    f.validation = m.filter_participants({"P02"});
    f.test = m.filter_participants({"P03"});
    EXPECT_THROW(grid_search(models::expand_grid(models::Algorithm::gp), {f}, 1, 0), LeakageError);
    EXPECT_THROW(grid_search({}, {f}, 1, 0), ConfigError);
}

TEST(GridSearch, SelectsBestAndIsJobInvariant) {
    const auto m = toy_cohort(4, 30, 2);
    FoldData f;
    f.train = m.filter_participants({"P01", "P02"});
    f.validation = m.filter_participants({"P03"});
    f.test = m.filter_participants({"P04"});
    models::GridAxes axes;
    axes.knn_k = {1, 5, 20};
    axes.knn_p = {2};
    const auto grid = models::expand_grid(models::Algorithm::knn, axes);
    const auto a = grid_search(grid, {f}, 1, 3);
    const auto b = grid_search(grid, {f}, 3, 3);
    ASSERT_EQ(a.scores.size(), 3u);
    EXPECT_EQ(a.best, b.best);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(a.scores[i].mean_mae, b.scores[i].mean_mae);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(a.scores[a.best].mean_mae, a.scores[i].mean_mae);
}

TEST(Loso, ReportsEveryStateAndBeatsRaw) {
    const auto m = toy_cohort(5, 60, 3);
    EvalConfig cfg;
    models::GridAxes axes;
    axes.svr_C = {10};
    axes.svr_epsilon = {0.1};
    axes.svr_gamma = {0.1};
    axes.svr_kernel = {"rbf"};
    cfg.methods.push_back({"svr", models::expand_grid(models::Algorithm::svr, axes), false});
    cfg.window.size_points = 3;
    cfg.methods.push_back({"svr_rolling", models::expand_grid(models::Algorithm::svr, axes), true});
    const auto out = evaluate_loso(m, cfg);
    EXPECT_EQ(out.folds.size(), 5u);
    const auto& all = out.report.find("svr", StateTag::ALL);
    EXPECT_EQ(all.participants.size(), 5u);
    EXPECT_LT(all.mae, all.raw_mae);
    ASSERT_TRUE(all.t_test.has_value());
    EXPECT_LT(all.t_test->p_value, 0.05);
    EXPECT_NO_THROW(out.report.find("device", StateTag::IS));
    const auto csv = report_csv(out.report);
    EXPECT_EQ(csv.substr(0, csv.find('\n')).find("method,RS_mae,RS_se"), 0u);
    EXPECT_THROW(out.report.find("knn", StateTag::ALL), Error);
}
