#include "pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "hrcal/errors.hpp"
#include "hrcal/io.hpp"
#include "hrcal/parallel.hpp"

namespace hrcal::cli {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    return out;
}

double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("key '" + key + "': '" + text + "' is not a number");
    return v;
}

long long to_integer(const std::string& key, const std::string& text) {
    long long v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc{} || res.ptr != text.data() + text.size())
        throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
    return v;
}

// Error carrying the pipeline stage for the diagnostic line.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what, bool config)
        : Error(what), stage_(std::move(stage)), config_(config) {}
    const std::string& stage() const noexcept { return stage_; }
    bool config() const noexcept { return config_; }

private:
    std::string stage_;
    bool config_;
};

template <class Fn>
auto stage(const std::string& name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const ConfigError& e) {
        throw StageError(name, e.what(), true);
    } catch (const std::exception& e) {
        throw StageError(name, e.what(), false);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

Config Config::parse(const std::string& text, const std::string& origin) {
    Config c;
    c.origin_ = origin;
    std::istringstream is(text);
    std::string line;
    std::size_t n = 0;
    while (std::getline(is, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ParseError(origin, n, "expected key = value");
        const auto key = trim(std::string_view(line).substr(0, eq));
        if (key.empty()) throw ParseError(origin, n, "empty key");
        if (c.values_.count(key)) throw ParseError(origin, n, "duplicate key '" + key + "'");
        c.values_[key] = trim(std::string_view(line).substr(eq + 1));
    }
    return c;
}

Config Config::load(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::num(const std::string& key, double fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
}

long long Config::integer(const std::string& key, long long fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_integer(key, it->second);
}

bool Config::flag(const std::string& key, bool fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
    if (it->second == "false" || it->second == "0" || it->second == "no") return false;
    throw ConfigError("key '" + key + "': '" + it->second + "' is not a boolean");
}

std::vector<std::string> Config::list(const std::string& key, const std::vector<std::string>& fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : split(it->second, ',');
}

std::vector<double> Config::nums(const std::string& key, const std::vector<double>& fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& s : split(it->second, ',')) out.push_back(to_double(key, s));
    return out;
}

std::vector<int> Config::ints(const std::string& key, const std::vector<int>& fallback) const {
    used_.insert(key);
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    for (const auto& s : split(it->second, ',')) out.push_back(static_cast<int>(to_integer(key, s)));
    return out;
}

void Config::reject_unknown() const {
    std::string bad;
    for (const auto& [k, v] : values_)
        if (!used_.count(k)) bad += (bad.empty() ? "" : ", ") + k;
    if (!bad.empty()) throw ConfigError("unknown config key(s) in " + origin_ + ": " + bad);
}

// ---------------------------------------------------------------------------
// Pipeline config

namespace {

std::array<double, 3> triple(const Config& c, const std::string& key, const std::array<double, 3>& fallback) {
    const auto v = c.nums(key, {fallback.begin(), fallback.end()});
    if (v.size() != 3) throw ConfigError("key '" + key + "' needs three values (RS, LS, IS)");
    return {v[0], v[1], v[2]};
}

synth::DeviceModel read_device(const Config& c, const std::string& prefix, synth::DeviceModel d) {
    d.interval_s = c.num(prefix + ".interval_s", d.interval_s);
    d.lag_s = c.num(prefix + ".lag_s", d.lag_s);
    d.bias_bpm = triple(c, prefix + ".bias", d.bias_bpm);
    d.noise_sd_bpm = triple(c, prefix + ".noise_sd", d.noise_sd_bpm);
    d.ma_gain = c.num(prefix + ".ma_gain", d.ma_gain);
    d.bias_per_step_rate = c.num(prefix + ".bias_per_step_rate", d.bias_per_step_rate);
    d.noise_ar = c.num(prefix + ".noise_ar", d.noise_ar);
    return d;
}

// Hidden layer lists are written "16-8-4;8-4-2".
std::vector<std::vector<int>> hidden_list(const Config& c, const std::string& key,
                                          const std::vector<std::vector<int>>& fallback) {
    if (!c.has(key)) {
        c.str(key, "");
        return fallback;
    }
    std::vector<std::vector<int>> out;
    for (const auto& arch : split(c.str(key, ""), ';')) {
        std::vector<int> layers;
        for (const auto& s : split(arch, '-')) layers.push_back(static_cast<int>(to_integer(key, s)));
        if (layers.empty()) throw ConfigError("key '" + key + "': empty architecture");
        out.push_back(std::move(layers));
    }
    return out;
}

models::GridAxes read_axes(const Config& c) {
    models::GridAxes g;
    if (c.str("grid.preset", "small") == "small") {
        g.svr_C = {1, 10};
        g.svr_epsilon = {0.1, 1};
        g.svr_gamma = {0.01, 0.1};
        g.svr_kernel = {"rbf"};
        g.svr_degree = {2};
        g.rf_max_features = {1, 3};
        g.rf_n_estimators = {200};
        g.rf_max_depth = {10};
        g.rf_min_samples_split = {2};
        g.rf_min_samples_leaf = {2, 8};
        g.gp_alpha = {1e-3, 1e-1, 1};
        g.mlp_hidden = {{16, 8, 4}, {8, 4, 2}};
        g.mlp_learning_rate = {0.01, 0.001};
        g.lr_C = {0.1, 1, 10};
        g.lr_penalty = {"l2"};
        g.knn_k = {10, 50};
        g.knn_p = {1, 2};
    } else if (c.str("grid.preset", "small") != "full") {
        throw ConfigError("grid.preset must be 'small' or 'full'");
    }
    g.svr_C = c.nums("grid.svr.C", g.svr_C);
    g.svr_epsilon = c.nums("grid.svr.epsilon", g.svr_epsilon);
    g.svr_gamma = c.nums("grid.svr.gamma", g.svr_gamma);
    g.svr_kernel = c.list("grid.svr.kernel", g.svr_kernel);
    g.svr_degree = c.ints("grid.svr.degree", g.svr_degree);
    g.rf_max_features = c.ints("grid.rf.max_features", g.rf_max_features);
    g.rf_n_estimators = c.ints("grid.rf.n_estimators", g.rf_n_estimators);
    g.rf_max_depth = c.ints("grid.rf.max_depth", g.rf_max_depth);
    g.rf_min_samples_split = c.ints("grid.rf.min_samples_split", g.rf_min_samples_split);
    g.rf_min_samples_leaf = c.ints("grid.rf.min_samples_leaf", g.rf_min_samples_leaf);
    g.gp_alpha = c.nums("grid.gp.alpha", g.gp_alpha);
    g.mlp_hidden = hidden_list(c, "grid.mlp.hidden", g.mlp_hidden);
    g.mlp_learning_rate = c.nums("grid.mlp.learning_rate", g.mlp_learning_rate);
    g.lr_C = c.nums("grid.lr.C", g.lr_C);
    g.lr_penalty = c.list("grid.lr.penalty", g.lr_penalty);
    g.knn_k = c.ints("grid.knn.k", g.knn_k);
    g.knn_p = c.ints("grid.knn.p", g.knn_p);
    auto positive = [](const auto& v, const char* name) {
        for (auto x : v)
            if (!(x > 0)) throw ConfigError(std::string("grid values for ") + name + " must be positive");
    };
    positive(g.svr_C, "svr.C");
    positive(g.svr_gamma, "svr.gamma");
    for (double e : g.svr_epsilon)
        if (e < 0) throw ConfigError("grid values for svr.epsilon must be non-negative");
    positive(g.gp_alpha, "gp.alpha");
    positive(g.mlp_learning_rate, "mlp.learning_rate");
    positive(g.lr_C, "lr.C");
    positive(g.knn_k, "knn.k");
    positive(g.knn_p, "knn.p");
    return g;
}

}  // namespace

PipelineConfig build_pipeline_config(const Config& c) {
    PipelineConfig pc;
    pc.seed = static_cast<std::uint64_t>(c.integer("seed", 0));
    pc.jobs = static_cast<int>(c.integer("jobs", 1));
    pc.data_dir = c.str("data_dir", "");
    pc.model_dir = c.str("model_dir", "");

    auto& co = pc.cohort;
    co.n_participants = static_cast<int>(c.integer("synth.n_participants", co.n_participants));
    co.seed = static_cast<std::uint64_t>(c.integer("synth.seed", static_cast<long long>(pc.seed)));
    co.fs_ecg = c.num("synth.fs_ecg", co.fs_ecg);
    co.fs_acc = c.num("synth.fs_acc", co.fs_acc);
    co.rs_min = c.num("synth.rs_min", co.rs_min);
    co.ls_min_low = c.num("synth.ls_min_low", co.ls_min_low);
    co.ls_min_high = c.num("synth.ls_min_high", co.ls_min_high);
    co.is_speeds_kmh = c.nums("synth.is_speeds_kmh", co.is_speeds_kmh);
    co.is_segment_min = c.nums("synth.is_segment_min", co.is_segment_min);
    co.speed_ramp_s = c.num("synth.speed_ramp_s", co.speed_ramp_s);
    co.ecg_noise_mv = c.num("synth.ecg_noise_mv", co.ecg_noise_mv);
    co.device = read_device(c, "synth.device", co.device);
    for (const auto& name : c.list("synth.extra_devices", {})) {
        synth::DeviceModel d = co.device;
        d.name = name;
        co.extra_devices.push_back(read_device(c, "synth.device." + name, d));
    }
    co.validate();

    auto& ex = pc.processing.extraction;
    ex.bandpass.low_hz = c.num("signal.bandpass_low_hz", ex.bandpass.low_hz);
    ex.bandpass.high_hz = c.num("signal.bandpass_high_hz", ex.bandpass.high_hz);
    ex.bandpass.order = static_cast<int>(c.integer("signal.bandpass_order", ex.bandpass.order));
    ex.lowpass.normalized_cutoff = c.num("signal.lowpass_cutoff", ex.lowpass.normalized_cutoff);
    ex.lowpass.order = static_cast<int>(c.integer("signal.lowpass_order", ex.lowpass.order));
    ex.resample_hz = c.num("signal.resample_hz", ex.resample_hz);
    ex.shift_s = triple(c, "signal.shift_s", ex.shift_s);
    ex.peaks.window_s = c.num("peaks.window_s", ex.peaks.window_s);
    ex.peaks.threshold_k = c.num("peaks.threshold_k", ex.peaks.threshold_k);
    ex.peaks.refractory_s = c.num("peaks.refractory_s", ex.peaks.refractory_s);
    ex.grid_step_s = c.num("grid.step_s", ex.grid_step_s);
    ex.grid_tolerance_s = c.num("grid.tolerance_s", ex.grid_tolerance_s);
    pc.processing.device_grid_tolerance_s = c.num("grid.device_tolerance_s", pc.processing.device_grid_tolerance_s);
    if (!(ex.grid_step_s > 0.0) || ex.grid_tolerance_s < 0.0) throw ConfigError("grid step must be positive");

    pc.assembly.pal_source = c.str("pal_source", pc.assembly.pal_source);
    pc.assembly.fusion_schemes = c.list("fusion_schemes", {});

    auto& ev = pc.eval;
    ev.seed = pc.seed;
    ev.jobs = pc.jobs;
    ev.selection.p_threshold = c.num("selection.p_threshold", ev.selection.p_threshold);
    ev.selection.mi_threshold = c.num("selection.mi_threshold", ev.selection.mi_threshold);
    ev.selection.mi_neighbors = static_cast<int>(c.integer("selection.mi_neighbors", ev.selection.mi_neighbors));
    ev.selection.seed = pc.seed;
    ev.force_device_hr = c.flag("selection.force_device_hr", ev.force_device_hr);
    ev.window.size_points = static_cast<int>(c.integer("window.size", ev.window.size_points));
    ev.window.cadence_s = ex.grid_step_s;
    ev.window.rolled_columns = c.list("window.rolled", ev.window.rolled_columns);
    if (ev.window.size_points < 1) throw ConfigError("window.size must be at least 1");

    const auto axes = read_axes(c);
    for (const auto& entry : c.list("methods", {"svr", "svr:rolling"})) {
        const auto parts = split(entry, ':');
        if (parts.empty() || parts.size() > 2 || (parts.size() == 2 && parts[1] != "rolling"))
            throw ConfigError("method entries look like 'svr' or 'svr:rolling', got '" + entry + "'");
        eval::MethodConfig mc;
        const auto alg = models::parse_algorithm(parts[0]);
        mc.rolling = parts.size() == 2;
        mc.name = parts[0] + (mc.rolling ? "_rolling" : "");
        mc.grid = models::expand_grid(alg, axes);
        if (mc.grid.empty()) throw ConfigError("empty grid for method " + mc.name);
        ev.methods.push_back(std::move(mc));
    }
    if (ev.methods.empty()) throw ConfigError("empty grid: no methods configured");
    c.reject_unknown();
    return pc;
}

// ---------------------------------------------------------------------------
// Cohort access

namespace {

std::size_t cohort_size(const PipelineConfig& pc) {
    if (pc.data_dir.empty()) return static_cast<std::size_t>(pc.cohort.n_participants);
    return io::list_sessions(pc.data_dir).size();
}

// Session i of the configured cohort, with generator truth when synthetic.
synth::SyntheticParticipant session_at(const PipelineConfig& pc, std::size_t i) {
    if (pc.data_dir.empty()) return synth::generate_participant(pc.cohort, static_cast<int>(i));
    synth::SyntheticParticipant p;
    p.session = io::load_session(io::list_sessions(pc.data_dir)[i]);
    return p;
}

template <class T, class Fn>
std::vector<T> map_sessions(const PipelineConfig& pc, Fn&& fn) {
    const std::size_t n = cohort_size(pc);
    if (n == 0) throw InsufficientDataError("cohort has no sessions");
    std::vector<T> out(n);
    parallel_for(n, pc.jobs, [&](std::size_t i) {
        const auto p = session_at(pc, i);
        io::validate_session(p.session);
        out[i] = fn(p);
    });
    return out;
}

}  // namespace

std::vector<features::ProcessedSession> load_processed(const PipelineConfig& pc) {
    return map_sessions<features::ProcessedSession>(
        pc, [&](const synth::SyntheticParticipant& p) { return features::process_session(p.session, pc.processing); });
}

// ---------------------------------------------------------------------------
// Commands

namespace {

void save(const fs::path& dir, const std::string& name, const std::string& content) {
    io::write_text_file(dir / name, content);
    spdlog::info("wrote {}", (dir / name).string());
}

std::string matrix_csv(const features::FeatureMatrix& m) {
    std::vector<std::string> header{"participant", "state", "time_s", "target", "device_raw"};
    for (const auto& c : m.columns()) header.push_back(c);
    io::CsvWriter w(header);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        w.cell(m.participant()[r]).cell(to_string(m.state()[r])).cell(m.time()[r]).cell(m.target()[r]);
        w.cell(m.baseline()[r]);
        for (std::size_t c = 0; c < m.cols(); ++c) w.cell(m.at(r, c));
        w.end_row();
    }
    return w.str();
}

int cmd_synth(const PipelineConfig& pc, const fs::path& out) {
    stage("synth", [&] {
        parallel_for(static_cast<std::size_t>(pc.cohort.n_participants), pc.jobs, [&](std::size_t i) {
            const auto p = synth::generate_participant(pc.cohort, static_cast<int>(i));
            const auto dir = out / p.session.profile.id;
            io::write_session(p.session, dir);
            io::write_series(p.truth.true_hr, dir / "truth_hr.csv", "t", "bpm");
        });
        return 0;
    });
    spdlog::info("wrote {} sessions under {}", pc.cohort.n_participants, out.string());
    return 0;
}

int cmd_extract(const PipelineConfig& pc, const fs::path& out) {
    const auto truths = stage("extract-hr", [&] {
        return map_sessions<std::pair<std::string, SampledSeries>>(pc, [&](const synth::SyntheticParticipant& p) {
            return std::make_pair(p.session.profile.id, signal::extract_truth_hr(p.session, pc.processing.extraction).series);
        });
    });
    stage("write", [&] {
        for (const auto& [id, s] : truths) {
            io::write_series(s, out / ("truth_hr_" + id + ".csv"), "t", "bpm");
        }
        return 0;
    });
    return 0;
}

features::FeatureMatrix assemble(const PipelineConfig& pc) {
    const auto sessions = stage("extract", [&] { return load_processed(pc); });
    return stage("features", [&] { return features::assemble_matrix(sessions, pc.assembly); });
}

int cmd_features(const PipelineConfig& pc, const fs::path& out) {
    const auto m = assemble(pc);
    stage("write", [&] {
        save(out, "features.csv", matrix_csv(m));
        return 0;
    });
    return 0;
}

std::vector<features::SelectionReport> fold_selection(const PipelineConfig& pc, const features::FeatureMatrix& m) {
    const auto folds = eval::make_folds(m.participant_ids());
    std::vector<features::SelectionReport> out(folds.size());
    parallel_for(folds.size(), pc.jobs, [&](std::size_t f) {
        const std::set<std::string> train(folds[f].train.begin(), folds[f].train.end());
        out[f] = features::select_features(m.filter_participants(train), pc.eval.selection);
    });
    return out;
}

int cmd_select(const PipelineConfig& pc, const fs::path& out) {
    const auto m = assemble(pc);
    const auto reports = stage("select", [&] { return fold_selection(pc, m); });
    stage("write", [&] {
        save(out, "selection_report.csv", features::selection_csv(features::aggregate_selection(reports, pc.eval.selection)));
        return 0;
    });
    return 0;
}

int cmd_run(const PipelineConfig& pc, const fs::path& out) {
    const auto m = assemble(pc);
    const auto res = stage("evaluate", [&] { return eval::evaluate_loso(m, pc.eval); });
    stage("write", [&] {
        std::vector<std::string> names;
        for (const auto& mc : pc.eval.methods) names.push_back(mc.name);
        save(out, "selection_report.csv",
             features::selection_csv(features::aggregate_selection(res.fold_selection, pc.eval.selection)));
        save(out, "grid_validation.csv", eval::grid_csv(res.grid));
        save(out, "eval_report.csv", eval::report_csv(res.report));
        save(out, "bland_altman.csv", eval::bland_altman_csv(res.report));
        save(out, "timeseries.csv", eval::timeseries_csv(names, res.predictions));
        return 0;
    });
    return 0;
}

// Columns of a method/state model: base feature names and the rolled subset.
struct ManifestEntry {
    std::string method;
    ActivityState state;
    std::string file;
    bool rolling = false;
    int window = 0;
    std::vector<std::string> columns;
    std::vector<std::string> rolled;
};

features::FeatureMatrix model_input(const features::FeatureMatrix& m, const ManifestEntry& e, double cadence) {
    auto sub = m.filter_state(tag_of(e.state)).select_columns(e.columns);
    if (!e.rolling) return sub;
    features::WindowSpec w;
    w.size_points = e.window;
    w.cadence_s = cadence;
    w.rolled_columns = e.rolled;
    return features::build_rolling_windows(sub, w);
}

std::string join(const std::vector<std::string>& v, char sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? std::string(1, sep) : "") + v[i];
    return s;
}

int cmd_train(const PipelineConfig& pc, const fs::path& out) {
    const auto m = assemble(pc);
    const auto res = stage("train", [&] { return eval::evaluate_loso(m, pc.eval); });
    const auto all_selection = stage("select", [&] { return features::select_features(m, pc.eval.selection); });
    io::CsvWriter manifest({"method", "state", "file", "rolling", "window", "columns", "rolled", "spec"});
    stage("train", [&] {
        for (std::size_t mi = 0; mi < pc.eval.methods.size(); ++mi) {
            const auto& mc = pc.eval.methods[mi];
            for (auto state : pc.eval.states) {
                const models::ModelSpec* best = nullptr;
                for (const auto& g : res.grid)
                    if (g.method == mc.name && g.state == state && g.best)
                        for (const auto& spec : mc.grid)
                            if (spec.label() == g.score.label) best = &spec;
                if (!best) continue;
                ManifestEntry e;
                e.method = mc.name;
                e.state = state;
                e.rolling = mc.rolling;
                e.window = pc.eval.window.size_points;
                std::vector<std::string> chosen;
                try {
                    chosen = all_selection.selected(tag_of(state));
                } catch (const Error&) {
                }
                for (const auto& c : m.columns())
                    if (std::find(chosen.begin(), chosen.end(), c) != chosen.end() ||
                        (pc.eval.force_device_hr && c == "device_hr"))
                        e.columns.push_back(c);
                for (const auto& c : pc.eval.window.rolled_columns)
                    if (std::find(e.columns.begin(), e.columns.end(), c) != e.columns.end()) e.rolled.push_back(c);
                e.file = "model_" + mc.name + "_" + std::string(to_string(state)) + ".txt";
                models::FitOptions opts;
                opts.seed = mix_seed(pc.seed, mi, static_cast<std::uint64_t>(state));
                const auto model = models::TrainedModel::fit(*best, model_input(m, e, pc.eval.window.cadence_s), opts);
                save(out, e.file, model.serialize());
                manifest.cell(e.method).cell(to_string(state)).cell(e.file).cell(e.rolling ? 1 : 0).cell(e.window);
                auto label = best->label();
                std::replace(label.begin(), label.end(), ',', ';');
                manifest.cell(join(e.columns, ';')).cell(join(e.rolled, ';')).cell(label);
                manifest.end_row();
            }
        }
        save(out, "manifest.csv", manifest.str());
        return 0;
    });
    return 0;
}

int cmd_evaluate(const PipelineConfig& pc, const fs::path& out) {
    if (pc.model_dir.empty()) throw StageError("evaluate", "model_dir is not set", true);
    const auto m = assemble(pc);
    std::vector<std::string> names;
    std::vector<std::vector<eval::PointPrediction>> preds;
    stage("evaluate", [&] {
        const fs::path dir = pc.model_dir;
        const auto table = io::read_csv(dir / "manifest.csv",
                                        {"method", "state", "file", "rolling", "window", "columns", "rolled", "spec"});
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const auto& row = table.rows[r];
            ManifestEntry e;
            e.method = row[0];
            e.state = parse_activity_state(row[1]);
            e.file = row[2];
            e.rolling = row[3] == "1";
            e.window = static_cast<int>(table.number(r, 4));
            e.columns = split(row[5], ';');
            e.rolled = split(row[6], ';');
            std::ifstream in(dir / e.file, std::ios::binary);
            if (!in) throw IoError("cannot open " + (dir / e.file).string());
            std::ostringstream ss;
            ss << in.rdbuf();
            const auto model = models::TrainedModel::deserialize(ss.str());
            const auto input = model_input(m, e, pc.eval.window.cadence_s);
            const auto p = model.predict(input);
            auto it = std::find(names.begin(), names.end(), e.method);
            if (it == names.end()) {
                names.push_back(e.method);
                preds.emplace_back();
                it = names.end() - 1;
            }
            auto& bucket = preds[static_cast<std::size_t>(it - names.begin())];
            for (std::size_t i = 0; i < input.rows(); ++i)
                bucket.push_back({input.participant()[i], input.state()[i], input.time()[i], input.target()[i],
                                  input.baseline()[i], p[i]});
        }
        return 0;
    });
    eval::EvalReport report;
    stage("report", [&] {
        std::vector<eval::PointPrediction> raw;
        for (std::size_t r = 0; r < m.rows(); ++r)
            raw.push_back({m.participant()[r], m.state()[r], m.time()[r], m.target()[r], m.baseline()[r], m.baseline()[r]});
        for (auto tag : kStateTags) {
            auto row = eval::summarize("device", tag, raw);
            row.t_test.reset();
            if (!row.participants.empty()) report.rows.push_back(std::move(row));
        }
        for (std::size_t i = 0; i < names.size(); ++i)
            for (auto tag : kStateTags) {
                auto row = eval::summarize(names[i], tag, preds[i]);
                if (!row.participants.empty()) report.rows.push_back(std::move(row));
            }
        save(out, "eval_report.csv", eval::report_csv(report));
        save(out, "bland_altman.csv", eval::bland_altman_csv(report));
        save(out, "timeseries.csv", eval::timeseries_csv(names, preds));
        return 0;
    });
    return 0;
}

struct DeviceGrid {
    std::string participant;
    SampledSeries truth;
    Schedule schedule;
    std::vector<std::pair<std::string, SampledSeries>> devices;
};

int cmd_validate(const PipelineConfig& pc, const fs::path& out) {
    const auto sessions = stage("extract", [&] {
        return map_sessions<DeviceGrid>(pc, [&](const synth::SyntheticParticipant& p) {
            DeviceGrid g;
            g.participant = p.session.profile.id;
            g.schedule = p.session.schedule;
            g.truth = signal::extract_truth_hr(p.session, pc.processing.extraction).series;
            g.devices.emplace_back("device", features::grid_device(p.session.device_hr, pc.processing));
            for (const auto& d : p.session.extra_devices)
                g.devices.emplace_back(d.name, features::grid_device(d.series, pc.processing));
            return g;
        });
    });

    std::vector<std::string> names;
    for (const auto& s : sessions)
        for (const auto& d : s.devices)
            if (std::find(names.begin(), names.end(), d.first) == names.end()) names.push_back(d.first);
    if (names.size() < 2) spdlog::warn("only one device HR source; the pairwise table will be empty");

    io::CsvWriter table({"device", "state", "n_participants", "n_points", "mae", "se"});
    io::CsvWriter pairs({"state", "device_a", "device_b", "n_participants", "mean_diff", "se", "t_statistic",
                         "p_value_unadjusted", "significant"});
    io::CsvWriter anova({"state", "n_participants", "dropped", "f_statistic", "dof1", "dof2", "p_value", "significant"});
    stage("validate", [&] {
        for (auto tag : kStateTags) {
            // participants x devices MAE matrix, NaN where a device has no coverage.
            std::vector<std::vector<double>> matrix;
            std::vector<std::size_t> points(names.size(), 0);
            for (const auto& s : sessions) {
                std::vector<double> row(names.size(), std::numeric_limits<double>::quiet_NaN());
                for (const auto& [name, dev] : s.devices) {
                    double sum = 0.0;
                    std::size_t n = 0, j = 0;
                    for (std::size_t i = 0; i < dev.size(); ++i) {
                        const auto st = state_at(s.schedule, dev.t[i]);
                        if (!st || !tag_contains(tag, *st)) continue;
                        while (j < s.truth.size() && s.truth.t[j] < dev.t[i]) ++j;
                        if (j < s.truth.size() && s.truth.t[j] == dev.t[i]) {
                            sum += std::abs(dev.v[i] - s.truth.v[j]);
                            ++n;
                        }
                    }
                    const auto k = static_cast<std::size_t>(std::find(names.begin(), names.end(), name) - names.begin());
                    if (n > 0) row[k] = sum / static_cast<double>(n);
                    points[k] += n;
                }
                matrix.push_back(std::move(row));
            }
            for (std::size_t k = 0; k < names.size(); ++k) {
                std::vector<double> v;
                for (const auto& row : matrix)
                    if (std::isfinite(row[k])) v.push_back(row[k]);
                table.cell(names[k]).cell(to_string(tag)).cell(v.size()).cell(points[k]);
                if (v.empty()) {
                    table.cell(std::string_view{}).cell(std::string_view{});
                } else {
                    const auto ms = eval::mae_se(v);
                    table.cell(ms.mean).cell(ms.se);
                }
                table.end_row();
            }
            if (names.size() < 2) continue;
            for (const auto& pr : eval::pairwise_comparisons(matrix)) {
                std::size_t n = 0;
                for (const auto& row : matrix)
                    if (std::isfinite(row[pr.a]) && std::isfinite(row[pr.b])) ++n;
                pairs.cell(to_string(tag)).cell(names[pr.a]).cell(names[pr.b]).cell(n).cell(pr.mean_diff).cell(pr.se);
                pairs.cell(pr.test.statistic).cell(pr.test.p_value).cell(pr.test.significant ? "*" : "");
                pairs.end_row();
            }
            try {
                std::size_t dropped = 0;
                const auto a = eval::rm_anova(matrix, &dropped);
                anova.cell(to_string(tag)).cell(matrix.size() - dropped).cell(dropped).cell(a.statistic);
                anova.cell(a.dof1).cell(a.dof2).cell(a.p_value).cell(a.significant ? "*" : "");
                anova.end_row();
            } catch (const InsufficientDataError& e) {
                spdlog::warn("{}: repeated-measures ANOVA skipped: {}", to_string(tag), e.what());
            }
        }
        save(out, "device_validation.csv", table.str());
        save(out, "device_pairwise.csv", pairs.str());
        save(out, "device_anova.csv", anova.str());
        return 0;
    });
    return 0;
}

}  // namespace

int run_command(const std::string& command, const GlobalOptions& opts) {
    try {
        Config cfg = stage("config", [&] {
            return opts.config_path.empty() ? Config{} : Config::load(opts.config_path);
        });
        if (opts.seed) cfg.set("seed", std::to_string(*opts.seed));
        if (opts.jobs) cfg.set("jobs", std::to_string(*opts.jobs));
        const auto pc = stage("config", [&] { return build_pipeline_config(cfg); });
        const fs::path out = opts.out_dir;
        stage("output", [&] {
            fs::create_directories(out);
            return 0;
        });
        if (command == "synth") return cmd_synth(pc, out);
        if (command == "extract-hr") return cmd_extract(pc, out);
        if (command == "features") return cmd_features(pc, out);
        if (command == "select") return cmd_select(pc, out);
        if (command == "train") return cmd_train(pc, out);
        if (command == "evaluate") return cmd_evaluate(pc, out);
        if (command == "validate") return cmd_validate(pc, out);
        if (command == "run") return cmd_run(pc, out);
        spdlog::error("unknown command '{}'", command);
        return 2;
    } catch (const StageError& e) {
        spdlog::error("stage '{}': {}", e.stage(), e.what());
        return e.config() ? 2 : 1;
    }
}

}  // namespace hrcal::cli
