#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hrcal/series.hpp"

namespace hrcal::io {

// Locale-independent decimal text, at most 9 significant digits.
std::string format_number(double v);
double parse_number(std::string_view text, const std::string& file, std::size_t line);

// Parsed CSV file with its header and 1-based source line numbers.
struct CsvTable {
    std::string path;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;

    std::size_t column(std::string_view name) const;
    double number(std::size_t row, std::size_t col) const;
};

// Reads a comma-separated file. When `expected_header` is non-empty the header
// must match it exactly. A zero-byte file yields an empty table.
CsvTable read_csv(const std::filesystem::path& path,
                  const std::vector<std::string>& expected_header = {});

// Incremental CSV builder; rows are joined with '\n' and the file always ends
// with a newline.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    CsvWriter& cell(std::string_view text);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
    void end_row();

    const std::string& str() const noexcept { return text_; }
    void save(const std::filesystem::path& path) const;

private:
    std::size_t width_;
    std::size_t filled_ = 0;
    std::string text_;
};

void write_text_file(const std::filesystem::path& path, std::string_view content);

// Throws ValidationError unless timestamps are strictly increasing and every
// value is finite (and non-negative for bpm series).
void validate_series(const SampledSeries& s, const std::string& name);
void validate_session(const SessionRecord& session);

// Coefficient of variation of the sampling intervals (0 for perfectly regular
// series, 0 when fewer than three samples).
double sampling_irregularity(const SampledSeries& s);

struct LoadOptions {
    // Device HR series whose interval CV exceeds this are flagged in the log.
    double irregular_cv_threshold = 0.5;
};

// Session directory layout:
//   meta.csv        fs_ecg,fs_acc,participant_id,gender,bmi,psqi
//   ecg.csv         t,mv
//   device_hr.csv   t,bpm
//   device_hr_<name>.csv  t,bpm        (optional extra devices)
//   accel.csv       t,x,y,z
//   steps.csv       t,cumulative_steps  (optional, may be empty)
//   device_pal.csv  t,level             (optional)
//   schedule.csv    state,t_start,t_end
SessionRecord load_session(const std::filesystem::path& dir, const LoadOptions& opts = {});
void write_session(const SessionRecord& session, const std::filesystem::path& dir);

// Every subdirectory holding a meta.csv, in lexicographic order.
std::vector<std::filesystem::path> list_sessions(const std::filesystem::path& cohort_dir);
std::vector<SessionRecord> load_cohort(const std::filesystem::path& cohort_dir,
                                       const LoadOptions& opts = {});

SampledSeries read_series(const std::filesystem::path& path, const std::string& time_col,
                          const std::string& value_col, Unit unit, Source source);
void write_series(const SampledSeries& s, const std::filesystem::path& path,
                  const std::string& time_col, const std::string& value_col);

}  // namespace hrcal::io
