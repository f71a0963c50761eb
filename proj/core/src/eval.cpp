#include "hrcal/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "hrcal/errors.hpp"
#include "hrcal/io.hpp"
#include "hrcal/parallel.hpp"
#include "hrcal/stats.hpp"

namespace hrcal::eval {

namespace {

constexpr double kAlpha = 0.05;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

FoldPlan make_folds(const std::vector<std::string>& ids) {
    if (ids.size() < 3) throw ConfigError("leave-one-subject-out needs at least 3 participants");
    std::set<std::string> unique(ids.begin(), ids.end());
    if (unique.size() != ids.size()) throw ConfigError("participant ids must be unique");
    FoldPlan plan;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        Fold f;
        f.test = ids[i];
        f.validation = ids[(i + 1) % ids.size()];
        for (std::size_t j = 0; j < ids.size(); ++j)
            if (j != i && j != (i + 1) % ids.size()) f.train.push_back(ids[j]);
        plan.push_back(std::move(f));
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Statistics

double mae(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw ShapeError("mae: length mismatch");
    if (pred.empty()) throw InsufficientDataError("mae of no points");
    double s = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - truth[i]);
    return s / static_cast<double>(pred.size());
}

double mae(const SampledSeries& pred, const SampledSeries& truth) {
    double s = 0.0;
    std::size_t n = 0, j = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        while (j < truth.size() && truth.t[j] < pred.t[i]) ++j;
        if (j < truth.size() && truth.t[j] == pred.t[i]) {
            s += std::abs(pred.v[i] - truth.v[j]);
            ++n;
        }
    }
    if (n == 0) throw InsufficientDataError("mae: series share no timestamps");
    return s / static_cast<double>(n);
}

MeanSe mae_se(std::span<const double> v) {
    if (v.empty()) throw InsufficientDataError("mae_se of no participants");
    const double m = stats::mean(v);
    const double se = v.size() > 1 ? stats::sample_sd(v) / std::sqrt(static_cast<double>(v.size())) : 0.0;
    return {m, se};
}

StatTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("paired t-test: length mismatch");
    const std::size_t n = a.size();
    if (n < 2) throw InsufficientDataError("paired t-test needs at least 2 pairs");
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
    const double m = stats::mean(d);
    const double sd = stats::sample_sd(d);
    StatTestResult r;
    r.dof1 = static_cast<double>(n - 1);
    if (sd == 0.0) {
        if (m == 0.0) {
            r.statistic = 0.0;
            r.p_value = 1.0;
        } else {
            r.statistic = m > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
        }
    } else {
        r.statistic = m / (sd / std::sqrt(static_cast<double>(n)));
        r.p_value = stats::t_two_sided(r.statistic, r.dof1);
    }
    r.significant = r.p_value < kAlpha;
    return r;
}

StatTestResult rm_anova(const std::vector<std::vector<double>>& matrix, std::size_t* dropped) {
    std::vector<const std::vector<double>*> rows;
    std::size_t k = 0, drop = 0;
    for (const auto& row : matrix) {
        if (k == 0) k = row.size();
        if (row.size() != k) throw ShapeError("rm_anova: ragged matrix");
        if (std::any_of(row.begin(), row.end(), [](double v) { return !std::isfinite(v); })) {
            ++drop;
            continue;
        }
        rows.push_back(&row);
    }
    if (dropped) *dropped = drop;
    const std::size_t n = rows.size();
    if (n < 2 || k < 2) throw InsufficientDataError("rm_anova needs at least 2 complete participants and 2 methods");

    double grand = 0.0;
    std::vector<double> col_mean(k, 0.0), row_mean(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double v = (*rows[i])[j];
            grand += v;
            col_mean[j] += v;
            row_mean[i] += v;
        }
    grand /= static_cast<double>(n * k);
    for (auto& c : col_mean) c /= static_cast<double>(n);
    for (auto& r : row_mean) r /= static_cast<double>(k);

    double ss_cond = 0.0, ss_subj = 0.0, ss_total = 0.0;
    for (std::size_t j = 0; j < k; ++j) ss_cond += static_cast<double>(n) * (col_mean[j] - grand) * (col_mean[j] - grand);
    for (std::size_t i = 0; i < n; ++i) ss_subj += static_cast<double>(k) * (row_mean[i] - grand) * (row_mean[i] - grand);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < k; ++j) ss_total += ((*rows[i])[j] - grand) * ((*rows[i])[j] - grand);
    const double ss_err = std::max(0.0, ss_total - ss_cond - ss_subj);

    StatTestResult r;
    r.dof1 = static_cast<double>(k - 1);
    r.dof2 = static_cast<double>((k - 1) * (n - 1));
    const double ms_cond = ss_cond / r.dof1;
    const double ms_err = ss_err / r.dof2;
    const double scale = std::max(1.0, ss_total);
    if (ss_cond <= 1e-14 * scale) {
        r.statistic = 0.0;
        r.p_value = 1.0;
    } else if (ss_err <= 1e-14 * scale) {
        r.statistic = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
    } else {
        r.statistic = ms_cond / ms_err;
        r.p_value = stats::f_upper_tail(r.statistic, r.dof1, r.dof2);
    }
    r.significant = r.p_value < kAlpha;
    return r;
}

std::vector<PairwiseRow> pairwise_comparisons(const std::vector<std::vector<double>>& matrix) {
    std::vector<PairwiseRow> out;
    if (matrix.empty()) return out;
    const std::size_t k = matrix.front().size();
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a + 1; b < k; ++b) {
            std::vector<double> xa, xb, d;
            for (const auto& row : matrix) {
                if (!std::isfinite(row[a]) || !std::isfinite(row[b])) continue;
                xa.push_back(row[a]);
                xb.push_back(row[b]);
                d.push_back(row[a] - row[b]);
            }
            if (d.size() < 2) continue;
            const auto ms = mae_se(d);
            out.push_back({a, b, ms.mean, ms.se, paired_t_test(xa, xb)});
        }
    return out;
}

BlandAltman bland_altman(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("bland_altman: length mismatch");
    if (a.size() < 2) throw InsufficientDataError("bland_altman needs at least 2 pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    BlandAltman ba;
    ba.n = d.size();
    ba.mean_diff = stats::mean(d);
    ba.sd_diff = stats::sample_sd(d);
    ba.loa_low = ba.mean_diff - 1.96 * ba.sd_diff;
    ba.loa_high = ba.mean_diff + 1.96 * ba.sd_diff;
    for (double v : d)
        if (std::abs(v - ba.mean_diff) > 1.96 * ba.sd_diff) ++ba.n_outside;
    return ba;
}

double error_reduction(double mae_raw, double mae_cal) {
    if (mae_raw == 0.0) throw DomainError("error reduction undefined for a raw MAE of 0");
    return 100.0 * (mae_raw - mae_cal) / mae_raw;
}

// ---------------------------------------------------------------------------
// Grid search

std::size_t select_best(const std::vector<SpecScore>& scores) {
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i].failed) continue;
        if (best == scores.size() || scores[i].mean_mae < scores[best].mean_mae) best = i;
    }
    if (best == scores.size()) throw TrainingError("every grid specification failed to fit");
    return best;
}

GridResult grid_search(const std::vector<models::ModelSpec>& grid, const std::vector<FoldData>& folds, int jobs,
                       std::uint64_t seed) {
    if (grid.empty()) throw ConfigError("empty grid");
    if (folds.empty()) throw InsufficientDataError("grid search without folds");
    for (const auto& f : folds) {
        const auto train_ids = f.train.participant_ids();
        const std::set<std::string> train_set(train_ids.begin(), train_ids.end());
        for (const auto& other : {f.validation.participant_ids(), f.test.participant_ids()})
            for (const auto& id : other)
                if (train_set.count(id))
                    throw LeakageError("participant " + id + " is in both training and held-out rows of fold " +
                                       std::to_string(f.fold_id));
    }

    const std::size_t S = grid.size(), F = folds.size();
    std::vector<double> val_mae(S * F, kNaN);
    std::vector<std::string> errors(S * F);
    GridResult result;
    result.test_predictions.assign(S, std::vector<std::vector<double>>(F));

    parallel_for(S * F, jobs, [&](std::size_t cell) {
        const std::size_t s = cell / F, f = cell % F;
        const auto& fd = folds[f];
        try {
            models::FitOptions opts;
            opts.fold_id = fd.fold_id;
            opts.seed = mix_seed(seed, static_cast<std::uint64_t>(fd.fold_id), s);
            const auto model = models::TrainedModel::fit(grid[s], fd.train, opts);
            const auto vp = model.predict(fd.validation);
            val_mae[cell] = mae(vp, fd.validation.target());
            if (!std::isfinite(val_mae[cell])) throw TrainingError("non-finite validation predictions");
            result.test_predictions[s][f] = model.predict(fd.test);
        } catch (const std::exception& e) {
            val_mae[cell] = kNaN;
            errors[cell] = e.what();
        }
    });

    for (std::size_t s = 0; s < S; ++s) {
        SpecScore sc;
        sc.label = grid[s].label();
        for (std::size_t f = 0; f < F; ++f) {
            sc.fold_mae.push_back(val_mae[s * F + f]);
            if (!errors[s * F + f].empty() && sc.failure.empty()) sc.failure = errors[s * F + f];
        }
        sc.failed = !sc.failure.empty();
        if (!sc.failed) {
            const auto ms = mae_se(sc.fold_mae);
            sc.mean_mae = ms.mean;
            sc.se_mae = ms.se;
        } else {
            sc.mean_mae = kNaN;
            sc.se_mae = kNaN;
            spdlog::debug("{} failed: {}", sc.label, sc.failure);
        }
        result.scores.push_back(std::move(sc));
    }
    result.best = select_best(result.scores);
    return result;
}

// ---------------------------------------------------------------------------
// LOSO

const MethodStateResult& EvalReport::find(const std::string& method, StateTag state) const {
    for (const auto& r : rows)
        if (r.method == method && r.state == state) return r;
    throw ShapeError("no report row for " + method + " / " + std::string(to_string(state)));
}

MethodStateResult summarize(const std::string& method, StateTag state, const std::vector<PointPrediction>& points) {
    MethodStateResult r;
    r.method = method;
    r.state = state;
    std::map<std::string, std::size_t> index;
    std::vector<double> sum_cal, sum_raw, count;
    std::vector<double> cal, raw, truth, abs_cal, abs_raw;
    for (const auto& p : points) {
        if (!tag_contains(state, p.state)) continue;
        auto it = index.find(p.participant);
        if (it == index.end()) {
            it = index.emplace(p.participant, r.participants.size()).first;
            r.participants.push_back(p.participant);
            sum_cal.push_back(0.0);
            sum_raw.push_back(0.0);
            count.push_back(0.0);
        }
        sum_cal[it->second] += std::abs(p.calibrated - p.truth);
        sum_raw[it->second] += std::abs(p.raw - p.truth);
        count[it->second] += 1.0;
        cal.push_back(p.calibrated);
        raw.push_back(p.raw);
        truth.push_back(p.truth);
        abs_cal.push_back(std::abs(p.calibrated - p.truth));
        abs_raw.push_back(std::abs(p.raw - p.truth));
    }
    r.n_points = cal.size();
    if (r.participants.empty()) return r;
    for (std::size_t i = 0; i < r.participants.size(); ++i) {
        r.participant_mae.push_back(sum_cal[i] / count[i]);
        r.participant_raw_mae.push_back(sum_raw[i] / count[i]);
    }
    const auto ms = mae_se(r.participant_mae);
    r.mae = ms.mean;
    r.se = ms.se;
    r.raw_mae = stats::mean(r.participant_raw_mae);
    if (r.raw_mae > 0.0) r.error_reduction_pct = error_reduction(r.raw_mae, r.mae);
    if (cal.size() >= 2) {
        r.t_test = paired_t_test(abs_raw, abs_cal);
        r.agreement = bland_altman(cal, truth);
    }
    return r;
}

namespace {

features::FeatureMatrix prepare(const features::FeatureMatrix& m, const std::vector<std::string>& columns,
                                const MethodConfig& method, const features::WindowSpec& window) {
    auto out = m.select_columns(columns);
    if (!method.rolling) return out;
    features::WindowSpec w = window;
    w.rolled_columns.clear();
    for (const auto& c : window.rolled_columns)
        if (std::find(columns.begin(), columns.end(), c) != columns.end()) w.rolled_columns.push_back(c);
    return features::build_rolling_windows(out, w);
}

}  // namespace

EvalOutputs evaluate_loso(const features::FeatureMatrix& m, const EvalConfig& cfg) {
    if (cfg.methods.empty()) throw ConfigError("no evaluation methods configured");
    for (const auto& mc : cfg.methods)
        if (mc.grid.empty()) throw ConfigError("empty grid for method " + mc.name);

    EvalOutputs out;
    const auto ids = m.participant_ids();
    out.folds = make_folds(ids);
    const std::size_t F = out.folds.size();

    // Feature selection on each fold's training participants only.
    out.fold_selection.resize(F);
    parallel_for(F, cfg.jobs, [&](std::size_t f) {
        const auto& fold = out.folds[f];
        const std::set<std::string> train(fold.train.begin(), fold.train.end());
        if (train.count(fold.test) || train.count(fold.validation))
            throw LeakageError("fold " + std::to_string(f) + " trains on a held-out participant");
        out.fold_selection[f] = features::select_features(m.filter_participants(train), cfg.selection);
    });

    out.predictions.resize(cfg.methods.size());
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const auto& method = cfg.methods[mi];
        for (auto state : cfg.states) {
            const auto tag = tag_of(state);
            const auto sm = m.filter_state(tag);
            std::vector<FoldData> folds;
            for (std::size_t f = 0; f < F; ++f) {
                const auto& fold = out.folds[f];
                std::vector<std::string> cols;
                std::vector<std::string> chosen;
                bool have_selection = true;
                try {
                    chosen = out.fold_selection[f].selected(tag);
                } catch (const Error&) {
                    have_selection = false;
                }
                for (const auto& c : m.columns()) {
                    const bool sel = std::find(chosen.begin(), chosen.end(), c) != chosen.end();
                    if (sel || (cfg.force_device_hr && c == "device_hr") || !have_selection) cols.push_back(c);
                }
                if (cols.empty()) cols.push_back(m.columns().front());

                FoldData fd;
                fd.fold_id = static_cast<int>(f);
                const std::set<std::string> train(fold.train.begin(), fold.train.end());
                fd.train = prepare(sm.filter_participants(train), cols, method, cfg.window);
                fd.validation = prepare(sm.filter_participants({fold.validation}), cols, method, cfg.window);
                fd.test = prepare(sm.filter_participants({fold.test}), cols, method, cfg.window);
                if (fd.train.rows() < 2 || fd.validation.empty() || fd.test.empty()) {
                    spdlog::warn("{} {}: fold {} skipped (train {}, validation {}, test {} rows)", method.name,
                                 to_string(state), f, fd.train.rows(), fd.validation.rows(), fd.test.rows());
                    continue;
                }
                folds.push_back(std::move(fd));
            }
            if (folds.empty()) {
                spdlog::warn("{} {}: no usable folds", method.name, to_string(state));
                continue;
            }
            const auto seed = mix_seed(cfg.seed, mi, static_cast<std::uint64_t>(state) + 1);
            auto gr = grid_search(method.grid, folds, cfg.jobs, seed);
            spdlog::info("{} {}: best {} (validation MAE {:.3f})", method.name, to_string(state),
                         gr.scores[gr.best].label, gr.scores[gr.best].mean_mae);
            for (std::size_t s = 0; s < gr.scores.size(); ++s)
                out.grid.push_back({method.name, state, gr.scores[s], s == gr.best});
            for (std::size_t f = 0; f < folds.size(); ++f) {
                const auto& test = folds[f].test;
                const auto& pred = gr.test_predictions[gr.best][f];
                for (std::size_t r = 0; r < test.rows(); ++r)
                    out.predictions[mi].push_back({test.participant()[r], test.state()[r], test.time()[r],
                                                   test.target()[r], test.baseline()[r], pred[r]});
            }
        }
        std::stable_sort(out.predictions[mi].begin(), out.predictions[mi].end(),
                         [](const PointPrediction& a, const PointPrediction& b) {
                             return a.participant != b.participant ? a.participant < b.participant : a.time < b.time;
                         });
    }

    // Raw device rows over every evaluated point of the full matrix.
    std::vector<PointPrediction> raw;
    for (std::size_t r = 0; r < m.rows(); ++r) {
        if (std::find(cfg.states.begin(), cfg.states.end(), m.state()[r]) == cfg.states.end()) continue;
        raw.push_back({m.participant()[r], m.state()[r], m.time()[r], m.target()[r], m.baseline()[r], m.baseline()[r]});
    }
    for (auto tag : kStateTags) {
        auto row = summarize("device", tag, raw);
        row.t_test.reset();
        if (!row.participants.empty()) out.report.rows.push_back(std::move(row));
    }
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi)
        for (auto tag : kStateTags) {
            auto row = summarize(cfg.methods[mi].name, tag, out.predictions[mi]);
            if (!row.participants.empty()) out.report.rows.push_back(std::move(row));
        }
    return out;
}

// ---------------------------------------------------------------------------
// Report files

std::string report_csv(const EvalReport& report) {
    std::vector<std::string> header{"method"};
    for (auto tag : kStateTags) {
        const std::string s(to_string(tag));
        for (const char* c : {"_mae", "_se", "_reduction_pct", "_p_value", "_sig", "_n"}) header.push_back(s + c);
    }
    io::CsvWriter w(header);
    std::vector<std::string> methods;
    for (const auto& r : report.rows)
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    for (const auto& method : methods) {
        w.cell(method);
        for (auto tag : kStateTags) {
            const MethodStateResult* row = nullptr;
            for (const auto& r : report.rows)
                if (r.method == method && r.state == tag) row = &r;
            if (!row) {
                for (int i = 0; i < 5; ++i) w.cell(std::string_view{});
                w.cell(0);
                continue;
            }
            w.cell(row->mae).cell(row->se);
            if (row->t_test) {
                w.cell(row->error_reduction_pct).cell(row->t_test->p_value);
                w.cell(row->t_test->significant && row->error_reduction_pct > 0.0 ? "*" : "");
            } else {
                w.cell(std::string_view{}).cell(std::string_view{}).cell(std::string_view{});
            }
            w.cell(row->participants.size());
        }
        w.end_row();
    }
    return w.str();
}

std::string bland_altman_csv(const EvalReport& report) {
    io::CsvWriter w({"method", "state", "n", "mean_diff", "sd_diff", "loa_low", "loa_high", "n_outside"});
    for (const auto& r : report.rows) {
        if (!r.agreement) continue;
        const auto& a = *r.agreement;
        w.cell(r.method).cell(to_string(r.state)).cell(a.n).cell(a.mean_diff).cell(a.sd_diff);
        w.cell(a.loa_low).cell(a.loa_high).cell(a.n_outside);
        w.end_row();
    }
    return w.str();
}

std::string grid_csv(const std::vector<GridRow>& rows) {
    io::CsvWriter w({"method", "state", "spec", "mean_validation_mae", "se_validation_mae", "folds", "failed", "best"});
    for (const auto& r : rows) {
        w.cell(r.method).cell(to_string(r.state)).cell(r.score.label);
        if (r.score.failed)
            w.cell(std::string_view{}).cell(std::string_view{});
        else
            w.cell(r.score.mean_mae).cell(r.score.se_mae);
        w.cell(r.score.fold_mae.size()).cell(r.score.failed ? 1 : 0).cell(r.best ? 1 : 0);
        w.end_row();
    }
    return w.str();
}

std::string timeseries_csv(const std::vector<std::string>& methods,
                           const std::vector<std::vector<PointPrediction>>& predictions) {
    std::vector<std::string> header{"participant", "state", "time_s", "truth", "raw"};
    for (const auto& m : methods) header.push_back(m);
    io::CsvWriter w(header);
    struct Row {
        ActivityState state;
        double truth;
        double raw;
        std::vector<double> cal;
    };
    std::map<std::pair<std::string, double>, Row> rows;
    for (std::size_t mi = 0; mi < predictions.size(); ++mi)
        for (const auto& p : predictions[mi]) {
            auto& row = rows[{p.participant, p.time}];
            if (row.cal.empty()) {
                row.state = p.state;
                row.truth = p.truth;
                row.raw = p.raw;
                row.cal.assign(methods.size(), kNaN);
            }
            row.cal[mi] = p.calibrated;
        }
    for (const auto& [key, row] : rows) {
        w.cell(key.first).cell(to_string(row.state)).cell(key.second).cell(row.truth).cell(row.raw);
        for (double v : row.cal) std::isfinite(v) ? w.cell(v) : w.cell(std::string_view{});
        w.end_row();
    }
    return w.str();
}

}  // namespace hrcal::eval
