#include "hrcal/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "hrcal/errors.hpp"

namespace fs = std::filesystem;

namespace hrcal::io {

namespace {

std::vector<std::string> split(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += v[i];
    }
    return s;
}

}  // namespace

std::string format_number(double v) {
    if (v == 0.0) return "0";  // also folds -0
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 9);
    return std::string(buf, res.ptr);
}

double parse_number(std::string_view text, const std::string& file, std::size_t line) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    double v = 0.0;
    const char* first = text.data();
    if (!text.empty() && text.front() == '+') ++first;
    auto res = std::from_chars(first, text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ParseError(file, line, "expected a number, got '" + std::string(text) + "'");
    return v;
}

std::size_t CsvTable::column(std::string_view name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError(path, 1, "missing column '" + std::string(name) + "'");
    return static_cast<std::size_t>(it - header.begin());
}

double CsvTable::number(std::size_t row, std::size_t col) const {
    return parse_number(rows.at(row).at(col), path, lines.at(row));
}

CsvTable read_csv(const fs::path& path, const std::vector<std::string>& expected_header) {
    CsvTable table;
    table.path = path.string();
    const std::string text = read_file(path);
    if (text.empty()) return table;

    std::size_t pos = 0;
    std::size_t line_no = 0;
    bool have_header = false;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        std::string_view line(text.data() + pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto cells = split(line);
        if (!have_header) {
            table.header = std::move(cells);
            have_header = true;
            if (!expected_header.empty() && table.header != expected_header)
                throw ParseError(table.path, line_no,
                                 "header '" + join(table.header) + "' does not match expected '" +
                                     join(expected_header) + "'");
            continue;
        }
        if (cells.size() != table.header.size())
            throw ParseError(table.path, line_no,
                             "expected " + std::to_string(table.header.size()) + " fields, got " +
                                 std::to_string(cells.size()));
        table.rows.push_back(std::move(cells));
        table.lines.push_back(line_no);
    }
    return table;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : width_(header.size()) {
    text_ = join(header);
    text_ += '\n';
}

CsvWriter& CsvWriter::cell(std::string_view text) {
    if (filled_ == width_) throw Error("CsvWriter: row has more cells than the header");
    if (filled_) text_ += ',';
    text_ += text;
    ++filled_;
    return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(std::string_view(format_number(v))); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::string_view(std::to_string(v))); }

void CsvWriter::end_row() {
    if (filled_ != width_) throw Error("CsvWriter: row has fewer cells than the header");
    text_ += '\n';
    filled_ = 0;
}

void CsvWriter::save(const fs::path& path) const { write_text_file(path, text_); }

void write_text_file(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

void validate_series(const SampledSeries& s, const std::string& name) {
    if (s.t.size() != s.v.size()) throw ValidationError(name + ": time/value length mismatch");
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s.t[i]) || !std::isfinite(s.v[i]))
            throw ValidationError(name + ": non-finite sample at index " + std::to_string(i));
        if (i > 0 && !(s.t[i] > s.t[i - 1]))
            throw ValidationError(name + ": timestamps not strictly increasing at index " +
                                  std::to_string(i) + " (t=" + format_number(s.t[i]) + ")");
        if (s.unit == Unit::bpm && s.v[i] < 0.0)
            throw ValidationError(name + ": negative heart rate at index " + std::to_string(i));
    }
}

namespace {

void validate_accel(const TriaxialSeries& a) {
    const std::size_t n = a.t.size();
    if (a.x.size() != n || a.y.size() != n || a.z.size() != n)
        throw ValidationError("accel: axis length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(a.t[i]) || !std::isfinite(a.x[i]) || !std::isfinite(a.y[i]) ||
            !std::isfinite(a.z[i]))
            throw ValidationError("accel: non-finite sample at index " + std::to_string(i));
        if (i > 0 && !(a.t[i] > a.t[i - 1]))
            throw ValidationError("accel: timestamps not strictly increasing at index " +
                                  std::to_string(i));
    }
}

void check_uniform(const std::vector<double>& t, double fs, const std::string& name) {
    if (t.size() < 2) return;
    const double dt = 1.0 / fs;
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (std::abs((t[i] - t[i - 1]) - dt) > 0.01 * dt)
            throw ValidationError(name + ": sampling not uniform at " + std::to_string(fs) +
                                  " Hz near t=" + format_number(t[i]));
    }
}

template <class Times>
void check_span(const Times& t, const Schedule& sch, const std::string& name) {
    if (t.empty() || sch.empty()) return;
    constexpr double slack = 1e-6;
    if (t.front() < sch.front().t_start - slack || t.back() > sch.back().t_end + slack)
        throw ValidationError(name + ": samples outside the schedule span");
}

}  // namespace

void validate_session(const SessionRecord& s) {
    const auto& p = s.profile;
    if (p.id.empty()) throw ValidationError("profile: empty participant id");
    if (!(std::isfinite(p.bmi) && p.bmi > 0.0)) throw ValidationError("profile: bmi must be finite and positive");
    if (p.psqi < 0 || p.psqi > 21) throw ValidationError("profile: psqi outside [0, 21]");
    if (!(s.fs_ecg > 0.0) || !(s.fs_acc > 0.0)) throw ValidationError("meta: sampling rates must be positive");

    for (std::size_t i = 0; i < s.schedule.size(); ++i) {
        const auto& e = s.schedule[i];
        if (!(e.t_end > e.t_start)) throw ValidationError("schedule: empty or reversed interval");
        if (i > 0 && e.t_start < s.schedule[i - 1].t_end)
            throw ValidationError("schedule: intervals overlap or are out of order at entry " +
                                  std::to_string(i));
    }

    validate_series(s.ecg, "ecg");
    check_uniform(s.ecg.t, s.fs_ecg, "ecg");
    validate_series(s.device_hr, "device_hr");
    for (const auto& d : s.extra_devices) validate_series(d.series, "device_hr_" + d.name);
    validate_accel(s.accel);
    validate_series(s.steps, "steps");
    validate_series(s.device_pal, "device_pal");

    check_span(s.ecg.t, s.schedule, "ecg");
    check_span(s.device_hr.t, s.schedule, "device_hr");
    check_span(s.accel.t, s.schedule, "accel");
    check_span(s.steps.t, s.schedule, "steps");
}

double sampling_irregularity(const SampledSeries& s) {
    if (s.size() < 3) return 0.0;
    const std::size_t m = s.size() - 1;
    double mean = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) mean += s.t[i] - s.t[i - 1];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double d = (s.t[i] - s.t[i - 1]) - mean;
        var += d * d;
    }
    var /= static_cast<double>(m);
    return mean > 0.0 ? std::sqrt(var) / mean : 0.0;
}

SampledSeries read_series(const fs::path& path, const std::string& time_col,
                          const std::string& value_col, Unit unit, Source source) {
    auto table = read_csv(path, {time_col, value_col});
    SampledSeries s;
    s.unit = unit;
    s.source = source;
    s.t.reserve(table.rows.size());
    s.v.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) s.push_back(table.number(r, 0), table.number(r, 1));
    return s;
}

void write_series(const SampledSeries& s, const fs::path& path, const std::string& time_col,
                  const std::string& value_col) {
    CsvWriter w({time_col, value_col});
    for (std::size_t i = 0; i < s.size(); ++i) {
        w.cell(s.t[i]).cell(s.v[i]);
        w.end_row();
    }
    w.save(path);
}

SessionRecord load_session(const fs::path& dir, const LoadOptions& opts) {
    SessionRecord s;

    auto meta = read_csv(dir / "meta.csv", {"fs_ecg", "fs_acc", "participant_id", "gender", "bmi", "psqi"});
    if (meta.rows.size() != 1) throw ParseError(meta.path, 2, "meta.csv must hold exactly one data row");
    s.fs_ecg = meta.number(0, 0);
    s.fs_acc = meta.number(0, 1);
    s.profile.id = meta.rows[0][2];
    const auto& g = meta.rows[0][3];
    if (g == "male") s.profile.gender = Gender::male;
    else if (g == "female") s.profile.gender = Gender::female;
    else throw ParseError(meta.path, meta.lines[0], "gender must be male or female");
    s.profile.bmi = meta.number(0, 4);
    const double psqi = meta.number(0, 5);
    if (psqi != std::floor(psqi)) throw ParseError(meta.path, meta.lines[0], "psqi must be an integer");
    s.profile.psqi = static_cast<int>(psqi);

    s.ecg = read_series(dir / "ecg.csv", "t", "mv", Unit::mV, Source::ecg);
    s.device_hr = read_series(dir / "device_hr.csv", "t", "bpm", Unit::bpm, Source::device);

    std::vector<fs::path> extras;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto name = entry.path().filename().string();
        if (name.rfind("device_hr_", 0) == 0 && entry.path().extension() == ".csv") extras.push_back(entry.path());
    }
    std::sort(extras.begin(), extras.end());
    for (const auto& p : extras) {
        auto stem = p.stem().string().substr(std::string("device_hr_").size());
        s.extra_devices.push_back({stem, read_series(p, "t", "bpm", Unit::bpm, Source::device)});
    }

    auto accel = read_csv(dir / "accel.csv", {"t", "x", "y", "z"});
    s.accel.t.reserve(accel.rows.size());
    for (std::size_t r = 0; r < accel.rows.size(); ++r) {
        s.accel.t.push_back(accel.number(r, 0));
        s.accel.x.push_back(accel.number(r, 1));
        s.accel.y.push_back(accel.number(r, 2));
        s.accel.z.push_back(accel.number(r, 3));
    }

    s.steps.unit = Unit::steps;
    s.steps.source = Source::device;
    if (fs::exists(dir / "steps.csv")) {
        auto steps = read_csv(dir / "steps.csv");
        if (!steps.header.empty() && steps.header != std::vector<std::string>{"t", "cumulative_steps"})
            throw ParseError(steps.path, 1, "header must be 't,cumulative_steps'");
        for (std::size_t r = 0; r < steps.rows.size(); ++r) s.steps.push_back(steps.number(r, 0), steps.number(r, 1));
    }

    s.device_pal.unit = Unit::level;
    s.device_pal.source = Source::device;
    if (fs::exists(dir / "device_pal.csv"))
        s.device_pal = read_series(dir / "device_pal.csv", "t", "level", Unit::level, Source::device);

    auto sched = read_csv(dir / "schedule.csv", {"state", "t_start", "t_end"});
    for (std::size_t r = 0; r < sched.rows.size(); ++r) {
        ActivityState st;
        try {
            st = parse_activity_state(sched.rows[r][0]);
        } catch (const ValidationError& e) {
            throw ParseError(sched.path, sched.lines[r], e.what());
        }
        s.schedule.push_back({st, sched.number(r, 1), sched.number(r, 2)});
    }

    validate_session(s);

    const double cv = sampling_irregularity(s.device_hr);
    if (cv > opts.irregular_cv_threshold)
        spdlog::warn("{}: device HR sampling is irregular (interval CV {:.3f})", s.profile.id, cv);
    return s;
}

void write_session(const SessionRecord& s, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    CsvWriter meta({"fs_ecg", "fs_acc", "participant_id", "gender", "bmi", "psqi"});
    meta.cell(s.fs_ecg).cell(s.fs_acc).cell(s.profile.id).cell(to_string(s.profile.gender))
        .cell(s.profile.bmi).cell(s.profile.psqi);
    meta.end_row();
    meta.save(dir / "meta.csv");

    write_series(s.ecg, dir / "ecg.csv", "t", "mv");
    write_series(s.device_hr, dir / "device_hr.csv", "t", "bpm");
    for (const auto& d : s.extra_devices) write_series(d.series, dir / ("device_hr_" + d.name + ".csv"), "t", "bpm");

    CsvWriter acc({"t", "x", "y", "z"});
    for (std::size_t i = 0; i < s.accel.size(); ++i) {
        acc.cell(s.accel.t[i]).cell(s.accel.x[i]).cell(s.accel.y[i]).cell(s.accel.z[i]);
        acc.end_row();
    }
    acc.save(dir / "accel.csv");

    write_series(s.steps, dir / "steps.csv", "t", "cumulative_steps");
    if (!s.device_pal.empty()) write_series(s.device_pal, dir / "device_pal.csv", "t", "level");

    CsvWriter sched({"state", "t_start", "t_end"});
    for (const auto& e : s.schedule) {
        sched.cell(to_string(e.state)).cell(e.t_start).cell(e.t_end);
        sched.end_row();
    }
    sched.save(dir / "schedule.csv");
}

std::vector<fs::path> list_sessions(const fs::path& cohort_dir) {
    if (!fs::is_directory(cohort_dir)) throw IoError("not a directory: " + cohort_dir.string());
    std::vector<fs::path> dirs;
    for (const auto& entry : fs::directory_iterator(cohort_dir))
        if (entry.is_directory() && fs::exists(entry.path() / "meta.csv")) dirs.push_back(entry.path());
    std::sort(dirs.begin(), dirs.end());
    return dirs;
}

std::vector<SessionRecord> load_cohort(const fs::path& cohort_dir, const LoadOptions& opts) {
    std::vector<SessionRecord> out;
    for (const auto& d : list_sessions(cohort_dir)) out.push_back(load_session(d, opts));
    return out;
}

}  // namespace hrcal::io
