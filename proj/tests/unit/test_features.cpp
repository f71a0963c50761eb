#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hrcal/errors.hpp"
#include "hrcal/features.hpp"
#include "hrcal/stats.hpp"
#include "oracles.hpp"

using namespace hrcal;
using features::FeatureMatrix;

namespace {

FeatureMatrix ramp_matrix(const std::vector<std::size_t>& segments, double cadence = 15.0) {
    FeatureMatrix m({"device_hr", "pal", "bmi"});
    double t = 0.0;
    int k = 0;
    for (auto n : segments) {
        for (std::size_t i = 0; i < n; ++i) {
            const double row[] = {60.0 + k, static_cast<double>(k % 4), 22.0};
            m.append_row(row, 61.0 + k, 60.0 + k, t, ActivityState::RS, "P01");
            t += cadence;
            ++k;
        }
        t += 3 * cadence;
    }
    return m;
}

}  // namespace

TEST(FTest, PerfectAndNullRelationship) {
    std::vector<double> x, y, z;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 200; ++i) {
        x.push_back(i);
        y.push_back(2.0 * i + n01(rng));
        z.push_back(n01(rng));
    }
    EXPECT_LT(features::f_test(x, y).p_value, 1e-10);
    EXPECT_GT(features::f_test(x, z).p_value, 0.001);
    const double r = stats::pearson_r(x, z);
    EXPECT_NEAR(features::f_test(x, z).f_statistic, r * r / (1 - r * r) * 198, 1e-9);
}

TEST(FTest, ConstantColumnIsDegenerate) {
    std::vector<double> x(10, 1.0), y{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    EXPECT_THROW(features::f_test(x, y), DegenerateFeatureError);
}

TEST(MutualInformation, IndependentNearZeroAndDependentPositive) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    std::vector<double> x, y, z;
    for (int i = 0; i < 2000; ++i) {
        x.push_back(n01(rng));
        y.push_back(n01(rng));
        z.push_back(x.back() + 0.1 * n01(rng));
    }
    EXPECT_LT(features::mutual_information(x, y), 0.05);
    EXPECT_GT(features::mutual_information(x, z), 1.5);
}

TEST(MutualInformation, DiscreteFeatureEstimator) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n01;
    std::vector<double> c, y, noise;
    for (int i = 0; i < 3000; ++i) {
        c.push_back(i % 4);
        y.push_back(3.0 * c.back() + n01(rng));
        noise.push_back(n01(rng));
    }
    EXPECT_GT(features::mutual_information(c, y, 3, true), 0.8);
    EXPECT_LT(features::mutual_information(c, noise, 3, true), 0.05);
    EXPECT_TRUE(features::is_categorical("pal"));
    EXPECT_TRUE(features::is_categorical("pal[t-3]"));
    EXPECT_FALSE(features::is_categorical("device_hr"));
}

TEST(FeatureMatrix, SelectionAndFilters) {
    auto m = ramp_matrix({5});
    EXPECT_EQ(m.column("pal").size(), 5u);
    EXPECT_THROW(m.column_index("missing"), ShapeError);
    const auto s = m.select_columns({"bmi", "device_hr"});
    EXPECT_EQ(s.columns()[0], "bmi");
    EXPECT_EQ(s.at(2, 1), 62.0);
    EXPECT_EQ(m.filter_state(StateTag::IS).rows(), 0u);
    EXPECT_EQ(m.filter_state(StateTag::ALL).rows(), 5u);
}

TEST(RollingWindows, LayoutOldestFirst) {
    const auto m = ramp_matrix({4});
    features::WindowSpec w;
    w.size_points = 3;
    w.rolled_columns = {"device_hr"};
    const auto r = features::build_rolling_windows(m, w);
    ASSERT_EQ(r.rows(), 2u);
    EXPECT_EQ(r.columns()[0], features::lag_name("device_hr", 2));
    EXPECT_EQ(r.columns()[2], features::lag_name("device_hr", 0));
    EXPECT_EQ(r.at(0, 0), 60.0);
    EXPECT_EQ(r.at(0, 2), 62.0);
    EXPECT_EQ(r.columns().size(), 5u);
    EXPECT_EQ(r.target()[0], 63.0);
}

TEST(RollingWindows, RowCountOverGapPatterns) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> len(0, 25), count(1, 6);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::size_t> segs;
        for (int i = count(rng); i > 0; --i) segs.push_back(static_cast<std::size_t>(len(rng)));
        const auto m = ramp_matrix(segs);
        for (int w : {1, 5, 10}) {
            features::WindowSpec spec;
            spec.size_points = w;
            spec.rolled_columns = {"device_hr", "pal"};
            EXPECT_EQ(features::build_rolling_windows(m, spec).rows(), oracle::expected_window_rows(segs, w));
        }
    }
}

TEST(Scaler, StandardisesAndPassesConstants) {
    const auto m = ramp_matrix({10});
    const auto stats = features::fit_scaler(m);
    EXPECT_TRUE(stats.constant[2]);
    const auto s = features::apply_scaler(stats, m);
    const auto c = s.column("device_hr");
    EXPECT_NEAR(stats::mean(c), 0.0, 1e-12);
    EXPECT_NEAR(stats::population_sd(c), 1.0, 1e-12);
    EXPECT_EQ(s.at(0, 2), 22.0);
}

TEST(Selection, PicksInformativeColumn) {
    FeatureMatrix m({"device_hr", "noise"});
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 300; ++i) {
        const double hr = 60 + 20 * n01(rng);
        const double row[] = {hr, n01(rng)};
        m.append_row(row, hr + n01(rng), hr, 15.0 * i, kActivityStates[i % 3], "P01");
    }
    const auto rep = features::select_features(m, {});
    const auto sel = rep.selected(StateTag::ALL);
    ASSERT_FALSE(sel.empty());
    EXPECT_EQ(sel[0], "device_hr");
    EXPECT_FALSE(rep.find("noise", StateTag::ALL).mi_pass);
}
