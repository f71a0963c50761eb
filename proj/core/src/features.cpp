#include "hrcal/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <random>

#include "hrcal/errors.hpp"
#include "hrcal/io.hpp"
#include "hrcal/stats.hpp"

namespace hrcal::features {

// ---------------------------------------------------------------------------
// FeatureMatrix

FeatureMatrix::FeatureMatrix(std::vector<std::string> columns) : columns_(std::move(columns)) {}

std::size_t FeatureMatrix::column_index(std::string_view name) const {
    auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) throw ShapeError("no feature column named '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - columns_.begin());
}

bool FeatureMatrix::has_column(std::string_view name) const {
    return std::find(columns_.begin(), columns_.end(), name) != columns_.end();
}

std::vector<double> FeatureMatrix::column(std::size_t c) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
    return out;
}

void FeatureMatrix::append_row(std::span<const double> values, double target, double baseline, double time,
                               ActivityState state, const std::string& participant) {
    if (values.size() != columns_.size()) throw ShapeError("row arity does not match the column list");
    values_.insert(values_.end(), values.begin(), values.end());
    target_.push_back(target);
    baseline_.push_back(baseline);
    time_.push_back(time);
    state_.push_back(state);
    participant_.push_back(participant);
}

FeatureMatrix FeatureMatrix::select_rows(const std::vector<std::size_t>& rows) const {
    FeatureMatrix out(columns_);
    out.values_.reserve(rows.size() * cols());
    for (auto r : rows) out.append_row(row(r), target_[r], baseline_[r], time_[r], state_[r], participant_[r]);
    return out;
}

FeatureMatrix FeatureMatrix::select_columns(const std::vector<std::string>& names) const {
    std::vector<std::size_t> idx;
    for (const auto& n : names) idx.push_back(column_index(n));
    FeatureMatrix out(names);
    std::vector<double> buf(names.size());
    for (std::size_t r = 0; r < rows(); ++r) {
        for (std::size_t j = 0; j < idx.size(); ++j) buf[j] = at(r, idx[j]);
        out.append_row(buf, target_[r], baseline_[r], time_[r], state_[r], participant_[r]);
    }
    return out;
}

FeatureMatrix FeatureMatrix::filter_state(StateTag tag) const {
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < rows(); ++r)
        if (tag_contains(tag, state_[r])) keep.push_back(r);
    return select_rows(keep);
}

FeatureMatrix FeatureMatrix::filter_participants(const std::set<std::string>& ids) const {
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < rows(); ++r)
        if (ids.count(participant_[r])) keep.push_back(r);
    return select_rows(keep);
}

FeatureMatrix FeatureMatrix::exclude_participants(const std::set<std::string>& ids) const {
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < rows(); ++r)
        if (!ids.count(participant_[r])) keep.push_back(r);
    return select_rows(keep);
}

std::vector<std::string> FeatureMatrix::participant_ids() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& p : participant_)
        if (seen.insert(p).second) out.push_back(p);
    return out;
}

void FeatureMatrix::append(const FeatureMatrix& other) {
    if (other.columns_ != columns_) throw ShapeError("cannot append matrices with different columns");
    values_.insert(values_.end(), other.values_.begin(), other.values_.end());
    target_.insert(target_.end(), other.target_.begin(), other.target_.end());
    baseline_.insert(baseline_.end(), other.baseline_.begin(), other.baseline_.end());
    time_.insert(time_.end(), other.time_.begin(), other.time_.end());
    state_.insert(state_.end(), other.state_.begin(), other.state_.end());
    participant_.insert(participant_.end(), other.participant_.begin(), other.participant_.end());
}

bool is_categorical(std::string_view column) {
    const auto base = column.substr(0, column.find('['));
    return base == "pal" || base == "gender" || base.rfind("fusion_pal_", 0) == 0;
}

// ---------------------------------------------------------------------------
// Assembly

ProcessedSession process_session(const SessionRecord& session, const ProcessingConfig& cfg) {
    ProcessedSession p;
    p.profile = session.profile;
    p.schedule = session.schedule;
    p.truth = signal::extract_truth_hr(session, cfg.extraction).series;
    p.device = grid_device(session.device_hr, cfg);
    if (!session.accel.empty()) {
        p.cpm_va = activity::compute_counts(session.accel, activity::AxisMode::VA, cfg.counts);
        p.cpm_vm = activity::compute_counts(session.accel, activity::AxisMode::VM, cfg.counts);
    }
    p.step_rate = activity::steps_per_minute(session.steps);
    p.step_origin = session.steps.empty() ? 0.0 : session.steps.t.front();
    p.device_pal = session.device_pal;
    return p;
}

SampledSeries grid_device(const SampledSeries& device_hr, const ProcessingConfig& cfg) {
    signal::HeartRateSeries hr{device_hr, signal::Provenance::device_raw};
    return signal::align_to_grid(hr, cfg.extraction.grid_step_s, cfg.device_grid_tolerance_s).series;
}

std::vector<std::string> base_columns(const AssemblyConfig& cfg) {
    std::vector<std::string> cols{"device_hr", "pal", "step_rate", "gender", "psqi", "bmi"};
    for (const auto& s : cfg.fusion_schemes) cols.push_back("fusion_pal_" + s);
    return cols;
}

namespace {

// Value of a per-minute series (timestamps at minute starts) covering t.
std::optional<double> minute_value(const SampledSeries& s, double t) {
    auto it = std::upper_bound(s.t.begin(), s.t.end(), t);
    if (it == s.t.begin()) return std::nullopt;
    const auto i = static_cast<std::size_t>(it - s.t.begin()) - 1;
    if (t >= s.t[i] + 60.0) return std::nullopt;
    return s.v[i];
}

std::optional<double> step_rate_at(const ProcessedSession& p, double t) {
    const auto& s = p.step_rate;
    auto it = std::lower_bound(s.t.begin(), s.t.end(), t);
    if (it == s.t.end()) return std::nullopt;
    const auto i = static_cast<std::size_t>(it - s.t.begin());
    const double start = i == 0 ? p.step_origin : s.t[i - 1];
    if (!(t > start) && !(i == 0 && t == start)) return std::nullopt;
    return s.v[i];
}

std::optional<double> pal_at(const ProcessedSession& p, const std::string& source, double t) {
    if (source == "device") return minute_value(p.device_pal, t);
    const auto& scheme = activity::scheme_by_name(source);
    const auto& counts = scheme.axis_mode == activity::AxisMode::VA ? p.cpm_va : p.cpm_vm;
    auto cpm = minute_value(counts, t);
    if (!cpm) return std::nullopt;
    return static_cast<double>(activity::classify_pal(*cpm, scheme));
}

std::optional<double> lookup(const SampledSeries& s, double t) {
    auto it = std::lower_bound(s.t.begin(), s.t.end(), t - 1e-6);
    if (it == s.t.end() || std::abs(*it - t) > 1e-6) return std::nullopt;
    return s.v[static_cast<std::size_t>(it - s.t.begin())];
}

}  // namespace

FeatureMatrix assemble_matrix(const std::vector<ProcessedSession>& sessions, const AssemblyConfig& cfg) {
    if (cfg.pal_source != "device") activity::scheme_by_name(cfg.pal_source);
    for (const auto& s : cfg.fusion_schemes) activity::scheme_by_name(s);

    FeatureMatrix m(base_columns(cfg));
    std::vector<double> row(m.cols());
    for (const auto& p : sessions) {
        for (std::size_t i = 0; i < p.truth.size(); ++i) {
            const double t = p.truth.t[i];
            const auto state = state_at(p.schedule, t);
            if (!state) continue;
            const auto hr = lookup(p.device, t);
            const auto pal = pal_at(p, cfg.pal_source, t);
            const auto steps = step_rate_at(p, t);
            if (!hr || !pal || !steps) continue;
            row[0] = *hr;
            row[1] = *pal;
            row[2] = *steps;
            row[3] = p.profile.gender == Gender::female ? 1.0 : 0.0;
            row[4] = static_cast<double>(p.profile.psqi);
            row[5] = p.profile.bmi;
            bool complete = true;
            for (std::size_t f = 0; f < cfg.fusion_schemes.size(); ++f) {
                auto v = pal_at(p, cfg.fusion_schemes[f], t);
                if (!v) {
                    complete = false;
                    break;
                }
                row[6 + f] = *v;
            }
            if (!complete) continue;
            m.append_row(row, p.truth.v[i], *hr, t, *state, p.profile.id);
        }
    }
    if (m.empty()) throw InsufficientDataError("no grid point has both a target and every feature");
    return m;
}

// ---------------------------------------------------------------------------
// Feature tests

FTestResult f_test(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("f_test: column lengths differ");
    const std::size_t n = x.size();
    if (n < 3) throw InsufficientDataError("f_test needs at least three rows");
    if (stats::population_sd(x) == 0.0) throw DegenerateFeatureError("f_test: feature column is constant");
    if (stats::population_sd(y) == 0.0) throw DegenerateFeatureError("f_test: target is constant");
    const double r = stats::pearson_r(x, y);
    const double r2 = r * r;
    const double dof = static_cast<double>(n - 2);
    if (r2 >= 1.0) return {std::numeric_limits<double>::infinity(), 0.0};
    const double f = r2 / (1.0 - r2) * dof;
    return {f, stats::f_upper_tail(f, 1.0, dof)};
}

namespace {

std::vector<double> standardise_with_jitter(std::span<const double> v, std::mt19937_64& rng, bool jitter) {
    std::vector<double> out(v.begin(), v.end());
    const double sd = stats::population_sd(out);
    if (sd > 0.0)
        for (double& x : out) x /= sd;
    if (jitter) {
        double mean_abs = 0.0;
        for (double x : out) mean_abs += std::abs(x);
        mean_abs /= static_cast<double>(std::max<std::size_t>(1, out.size()));
        const double scale = 1e-10 * std::max(1.0, mean_abs);
        std::normal_distribution<double> nd(0.0, 1.0);
        for (double& x : out) x += scale * nd(rng);
    }
    return out;
}

// #{j : |v_j - c| < r} in a sorted vector.
std::size_t count_strictly_within(const std::vector<double>& sorted, double c, double r) {
    auto lo = std::upper_bound(sorted.begin(), sorted.end(), c - r);
    auto hi = std::lower_bound(sorted.begin(), sorted.end(), c + r);
    return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
}

double mi_continuous(const std::vector<double>& x, const std::vector<double>& y, int k) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    std::vector<double> xs(n), ys(y);
    for (std::size_t i = 0; i < n; ++i) xs[i] = x[order[i]];
    std::sort(ys.begin(), ys.end());

    const auto kk = static_cast<std::size_t>(k);
    double acc = 0.0;
    std::priority_queue<double> heap;
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t i = order[pos];
        heap = {};
        auto consider = [&](std::size_t j) {
            const double d = std::max(std::abs(x[j] - x[i]), std::abs(y[j] - y[i]));
            if (heap.size() < kk) heap.push(d);
            else if (d < heap.top()) {
                heap.pop();
                heap.push(d);
            }
        };
        std::size_t left = pos, right = pos + 1;
        bool go_left = pos > 0, go_right = right < n;
        while (go_left || go_right) {
            if (go_left) {
                const std::size_t j = order[left - 1];
                if (heap.size() == kk && std::abs(x[j] - x[i]) >= heap.top()) go_left = false;
                else {
                    consider(j);
                    --left;
                    go_left = left > 0;
                }
            }
            if (go_right) {
                const std::size_t j = order[right];
                if (heap.size() == kk && std::abs(x[j] - x[i]) >= heap.top()) go_right = false;
                else {
                    consider(j);
                    ++right;
                    go_right = right < n;
                }
            }
        }
        const double eps = heap.top();
        const std::size_t nx = count_strictly_within(xs, x[i], eps) - 1;
        const std::size_t ny = count_strictly_within(ys, y[i], eps) - 1;
        acc += stats::digamma(static_cast<double>(nx) + 1.0) + stats::digamma(static_cast<double>(ny) + 1.0);
    }
    return stats::digamma(static_cast<double>(n)) + stats::digamma(static_cast<double>(k)) -
           acc / static_cast<double>(n);
}

double mi_discrete(std::span<const double> labels, const std::vector<double>& y, int k) {
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < labels.size(); ++i) groups[labels[i]].push_back(i);

    std::vector<double> radius(labels.size(), 0.0);
    std::vector<double> k_used(labels.size(), 0.0);
    std::vector<double> group_size(labels.size(), 0.0);
    for (auto& [label, members] : groups) {
        const std::size_t count = members.size();
        for (auto i : members) group_size[i] = static_cast<double>(count);
        if (count < 2) continue;
        const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), count - 1);
        std::vector<double> vals;
        vals.reserve(count);
        for (auto i : members) vals.push_back(y[i]);
        std::vector<std::size_t> ord(count);
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        std::vector<double> sorted(count);
        for (std::size_t q = 0; q < count; ++q) sorted[q] = vals[ord[q]];
        for (std::size_t q = 0; q < count; ++q) {
            // merge outward from q to find the kk-th nearest neighbour in 1-D
            std::size_t l = q, r = q;
            double d = 0.0;
            for (std::size_t step = 0; step < kk; ++step) {
                const double dl = l > 0 ? sorted[q] - sorted[l - 1] : std::numeric_limits<double>::infinity();
                const double dr = r + 1 < count ? sorted[r + 1] - sorted[q] : std::numeric_limits<double>::infinity();
                if (dl <= dr) {
                    d = dl;
                    --l;
                } else {
                    d = dr;
                    ++r;
                }
            }
            const std::size_t i = members[ord[q]];
            radius[i] = std::nextafter(d, 0.0);
            k_used[i] = static_cast<double>(kk);
        }
    }

    std::vector<double> ys;
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (group_size[i] > 1) {
            kept.push_back(i);
            ys.push_back(y[i]);
        }
    }
    if (kept.empty()) return 0.0;
    std::sort(ys.begin(), ys.end());
    double psi_k = 0.0, psi_label = 0.0, psi_m = 0.0;
    for (auto i : kept) {
        auto lo = std::lower_bound(ys.begin(), ys.end(), y[i] - radius[i]);
        auto hi = std::upper_bound(ys.begin(), ys.end(), y[i] + radius[i]);
        const auto m = static_cast<double>(hi - lo);  // includes the point itself
        psi_k += stats::digamma(k_used[i]);
        psi_label += stats::digamma(group_size[i]);
        psi_m += stats::digamma(m);
    }
    const auto nk = static_cast<double>(kept.size());
    return stats::digamma(nk) + psi_k / nk - psi_label / nk - psi_m / nk;
}

}  // namespace

double mutual_information(std::span<const double> x, std::span<const double> y, int k, bool discrete_x,
                          std::uint64_t seed) {
    if (x.size() != y.size()) throw ShapeError("mutual_information: column lengths differ");
    if (k < 1) throw ConfigError("mutual_information: k must be >= 1");
    if (x.size() <= static_cast<std::size_t>(k))
        throw InsufficientDataError("mutual_information needs more rows than neighbours");
    std::mt19937_64 rng(seed);
    double mi;
    if (discrete_x) {
        const auto yy = standardise_with_jitter(y, rng, true);
        mi = mi_discrete(x, yy, k);
    } else {
        const auto xx = standardise_with_jitter(x, rng, true);
        const auto yy = standardise_with_jitter(y, rng, true);
        mi = mi_continuous(xx, yy, k);
    }
    return std::max(0.0, mi);
}

std::vector<FeatureTest> test_features(const FeatureMatrix& m, StateTag state, const SelectionConfig& cfg) {
    std::vector<FeatureTest> out;
    const auto& y = m.target();
    for (std::size_t c = 0; c < m.cols(); ++c) {
        FeatureTest t;
        t.feature = m.columns()[c];
        t.state = state;
        const auto x = m.column(c);
        try {
            const auto ft = f_test(x, y);
            t.f_statistic = ft.f_statistic;
            t.p_value = ft.p_value;
        } catch (const DegenerateFeatureError&) {
            t.degenerate = true;
            t.f_statistic = 0.0;
            t.p_value = 1.0;
        } catch (const InsufficientDataError&) {
            t.degenerate = true;
        }
        if (!t.degenerate && m.rows() > static_cast<std::size_t>(cfg.mi_neighbors))
            t.mi_nats = mutual_information(x, y, cfg.mi_neighbors, is_categorical(t.feature), cfg.seed + c);
        t.linear_pass = t.p_value < cfg.p_threshold;
        t.mi_pass = t.mi_nats > cfg.mi_threshold;
        t.selected = t.linear_pass || t.mi_pass;
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<std::string> SelectionReport::selected(StateTag state) const {
    std::vector<std::string> out;
    for (const auto& t : tests)
        if (t.state == state && t.selected) out.push_back(t.feature);
    return out;
}

const FeatureTest& SelectionReport::find(std::string_view feature, StateTag state) const {
    for (const auto& t : tests)
        if (t.feature == feature && t.state == state) return t;
    throw ShapeError("no selection result for '" + std::string(feature) + "' in " + std::string(to_string(state)));
}

SelectionReport select_features(const FeatureMatrix& m, const SelectionConfig& cfg) {
    SelectionReport report;
    for (auto tag : kStateTags) {
        const auto sub = m.filter_state(tag);
        if (sub.rows() < 3) continue;
        auto tests = test_features(sub, tag, cfg);
        report.tests.insert(report.tests.end(), tests.begin(), tests.end());
    }
    return report;
}

std::vector<AggregatedTest> aggregate_selection(const std::vector<SelectionReport>& folds,
                                                const SelectionConfig& cfg) {
    std::vector<AggregatedTest> out;
    std::map<std::pair<int, std::string>, std::size_t> index;
    std::vector<std::vector<double>> ps, mis, fs;
    for (const auto& rep : folds) {
        for (const auto& t : rep.tests) {
            auto key = std::make_pair(static_cast<int>(t.state), t.feature);
            auto it = index.find(key);
            if (it == index.end()) {
                it = index.emplace(key, out.size()).first;
                AggregatedTest a;
                a.feature = t.feature;
                a.state = t.state;
                out.push_back(a);
                ps.emplace_back();
                mis.emplace_back();
                fs.emplace_back();
            }
            auto& a = out[it->second];
            ps[it->second].push_back(t.p_value);
            mis[it->second].push_back(t.mi_nats);
            fs[it->second].push_back(t.f_statistic);
            a.folds += 1;
            a.folds_selected += t.selected ? 1 : 0;
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        auto& a = out[i];
        const double root_n = std::sqrt(static_cast<double>(ps[i].size()));
        a.p_mean = stats::mean(ps[i]);
        a.p_se = stats::sample_sd(ps[i]) / root_n;
        a.mi_mean = stats::mean(mis[i]);
        a.mi_se = stats::sample_sd(mis[i]) / root_n;
        a.f_mean = stats::mean(fs[i]);
        a.linear_pass = a.p_mean < cfg.p_threshold;
        a.mi_pass = a.mi_mean > cfg.mi_threshold;
        a.selected = a.linear_pass || a.mi_pass;
    }
    std::stable_sort(out.begin(), out.end(), [](const AggregatedTest& a, const AggregatedTest& b) {
        return static_cast<int>(a.state) < static_cast<int>(b.state);
    });
    return out;
}

std::string selection_csv(const std::vector<AggregatedTest>& rows) {
    io::CsvWriter w({"feature", "state", "f_statistic", "p_value", "p_value_se", "mi_nats", "mi_nats_se",
                     "linear", "mi", "selected", "folds_selected", "folds"});
    for (const auto& a : rows) {
        w.cell(a.feature).cell(to_string(a.state)).cell(a.f_mean).cell(a.p_mean).cell(a.p_se)
            .cell(a.mi_mean).cell(a.mi_se).cell(a.linear_pass ? "*" : "").cell(a.mi_pass ? "v" : "")
            .cell(a.selected ? "1" : "0").cell(a.folds_selected).cell(a.folds);
        w.end_row();
    }
    return w.str();
}

// ---------------------------------------------------------------------------
// Standardisation

ScalerStats fit_scaler(const FeatureMatrix& train, bool population_sd) {
    if (train.rows() < 2) throw InsufficientDataError("fit_scaler needs at least two rows");
    ScalerStats s;
    s.columns = train.columns();
    for (std::size_t c = 0; c < train.cols(); ++c) {
        const auto col = train.column(c);
        const double m = stats::mean(col);
        const double sd = population_sd ? stats::population_sd(col) : stats::sample_sd(col);
        const bool constant = !(sd > 1e-12 * std::max(1.0, std::abs(m)));
        s.mean.push_back(m);
        s.sd.push_back(sd);
        s.constant.push_back(constant);
    }
    return s;
}

void apply_scaler_inplace(const ScalerStats& stats, std::span<double> row) {
    if (row.size() != stats.columns.size()) throw ShapeError("scaler arity mismatch");
    for (std::size_t c = 0; c < row.size(); ++c)
        if (!stats.constant[c]) row[c] = (row[c] - stats.mean[c]) / stats.sd[c];
}

FeatureMatrix apply_scaler(const ScalerStats& stats, const FeatureMatrix& m) {
    if (m.columns() != stats.columns) throw ShapeError("scaler columns do not match the matrix");
    FeatureMatrix out = m;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t c = 0; c < out.cols(); ++c)
            if (!stats.constant[c]) out.at(r, c) = (out.at(r, c) - stats.mean[c]) / stats.sd[c];
    return out;
}

// ---------------------------------------------------------------------------
// Rolling windows

std::string lag_name(std::string_view column, int lag) {
    if (lag == 0) return std::string(column) + "[t]";
    return std::string(column) + "[t-" + std::to_string(lag) + "]";
}

namespace {

// Row indices per participant (first-appearance order), each sorted by time,
// then split where the step is not one cadence.
std::vector<std::vector<std::size_t>> segments_of(const FeatureMatrix& m, double cadence_s) {
    std::vector<std::vector<std::size_t>> segs;
    for (const auto& id : m.participant_ids()) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < m.rows(); ++r)
            if (m.participant()[r] == id) rows.push_back(r);
        std::stable_sort(rows.begin(), rows.end(),
                         [&](std::size_t a, std::size_t b) { return m.time()[a] < m.time()[b]; });
        std::vector<std::size_t> cur;
        for (auto r : rows) {
            if (!cur.empty() && std::abs(m.time()[r] - m.time()[cur.back()] - cadence_s) > 1e-6) {
                segs.push_back(std::move(cur));
                cur.clear();
            }
            cur.push_back(r);
        }
        if (!cur.empty()) segs.push_back(std::move(cur));
    }
    return segs;
}

}  // namespace

std::vector<std::size_t> contiguous_segments(const FeatureMatrix& m, double cadence_s) {
    std::vector<std::size_t> out;
    for (const auto& s : segments_of(m, cadence_s)) out.push_back(s.size());
    return out;
}

FeatureMatrix build_rolling_windows(const FeatureMatrix& m, const WindowSpec& spec) {
    if (spec.size_points < 1) throw ConfigError("window size must be >= 1");
    const auto w = static_cast<std::size_t>(spec.size_points);
    std::vector<std::size_t> rolled_idx;
    for (const auto& c : spec.rolled_columns) rolled_idx.push_back(m.column_index(c));
    std::vector<std::size_t> static_idx;
    for (std::size_t c = 0; c < m.cols(); ++c)
        if (std::find(rolled_idx.begin(), rolled_idx.end(), c) == rolled_idx.end()) static_idx.push_back(c);

    std::vector<std::string> names;
    for (const auto& c : spec.rolled_columns)
        for (int lag = spec.size_points - 1; lag >= 0; --lag) names.push_back(lag_name(c, lag));
    for (auto c : static_idx) names.push_back(m.columns()[c]);

    FeatureMatrix out(names);
    std::vector<double> buf(names.size());
    for (const auto& seg : segments_of(m, spec.cadence_s)) {
        if (seg.size() < w) continue;
        for (std::size_t pos = w - 1; pos < seg.size(); ++pos) {
            std::size_t k = 0;
            for (auto c : rolled_idx)
                for (std::size_t back = w; back-- > 0;) buf[k++] = m.at(seg[pos - back], c);
            const std::size_t r = seg[pos];
            for (auto c : static_idx) buf[k++] = m.at(r, c);
            out.append_row(buf, m.target()[r], m.baseline()[r], m.time()[r], m.state()[r], m.participant()[r]);
        }
    }
    return out;
}

}  // namespace hrcal::features
