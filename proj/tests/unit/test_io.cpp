#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "hrcal/errors.hpp"
#include "hrcal/io.hpp"
#include "hrcal/synth.hpp"

namespace fs = std::filesystem;
using namespace hrcal;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("hrcal_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST(FormatNumber, ShortAndLocaleFree) {
    EXPECT_EQ(io::format_number(2.0), "2");
    EXPECT_EQ(io::format_number(0.1), "0.1");
    EXPECT_EQ(io::format_number(-1.5e-7), "-1.5e-07");
    EXPECT_DOUBLE_EQ(io::parse_number("3.25", "x", 1), 3.25);
}

TEST(ReadCsv, ReportsFileAndLineOnBadNumber) {
    const auto dir = scratch_dir("bad");
    write(dir / "s.csv", "t,bpm\n0,60\n1,abc\n");
    try {
        io::read_series(dir / "s.csv", "t", "bpm", Unit::bpm, Source::device);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3u);
        EXPECT_NE(e.file().find("s.csv"), std::string::npos);
    }
}

TEST(ReadCsv, HeaderMismatchIsParseError) {
    const auto dir = scratch_dir("hdr");
    write(dir / "s.csv", "time,bpm\n0,60\n");
    EXPECT_THROW(io::read_csv(dir / "s.csv", {"t", "bpm"}), ParseError);
}

TEST(ReadCsv, MissingFileIsIoError) {
    EXPECT_THROW(io::read_csv("/nonexistent/hrcal.csv"), IoError);
}

TEST(CsvWriter, EndsWithNewline) {
    io::CsvWriter w({"a", "b"});
    w.cell(1).cell(0.25);
    w.end_row();
    EXPECT_EQ(w.str(), "a,b\n1,0.25\n");
}

TEST(ValidateSeries, RejectsNonMonotoneAndNegativeBpm) {
    SampledSeries s;
    s.push_back(0, 60);
    s.push_back(0, 61);
    EXPECT_THROW(io::validate_series(s, "hr"), ValidationError);
    SampledSeries n;
    n.push_back(0, -1);
    EXPECT_THROW(io::validate_series(n, "hr"), ValidationError);
    SampledSeries nan;
    nan.push_back(0, std::nan(""));
    EXPECT_THROW(io::validate_series(nan, "hr"), ValidationError);
}

TEST(SamplingIrregularity, ZeroForRegular) {
    SampledSeries s;
    for (int i = 0; i < 10; ++i) s.push_back(5.0 * i, 60);
    EXPECT_NEAR(io::sampling_irregularity(s), 0.0, 1e-12);
    s.t[5] += 2.0;
    EXPECT_GT(io::sampling_irregularity(s), 0.0);
}

TEST(Session, WriteLoadRoundTrip) {
    synth::CohortConfig cfg;
    cfg.n_participants = 1;
    cfg.rs_min = 2;
    cfg.ls_min_low = cfg.ls_min_high = 2;
    cfg.is_speeds_kmh = {0, 5};
    cfg.is_segment_min = {1, 1};
    synth::DeviceModel extra;
    extra.name = "band";
    cfg.extra_devices.push_back(extra);
    const auto p = synth::generate_participant(cfg, 0);
    const auto dir = scratch_dir("session");
    io::write_session(p.session, dir / "P01");
    const auto list = io::list_sessions(dir);
    ASSERT_EQ(list.size(), 1u);
    const auto back = io::load_session(list[0]);
    EXPECT_EQ(back.profile.id, p.session.profile.id);
    EXPECT_EQ(back.profile.gender, p.session.profile.gender);
    EXPECT_EQ(back.schedule.size(), p.session.schedule.size());
    ASSERT_EQ(back.ecg.size(), p.session.ecg.size());
    EXPECT_NEAR(back.ecg.v[100], p.session.ecg.v[100], 1e-6);
    ASSERT_EQ(back.device_hr.size(), p.session.device_hr.size());
    ASSERT_EQ(back.extra_devices.size(), 1u);
    EXPECT_EQ(back.extra_devices[0].name, "band");
    EXPECT_EQ(back.accel.size(), p.session.accel.size());
    EXPECT_EQ(back.steps.size(), p.session.steps.size());
    EXPECT_NO_THROW(io::validate_session(back));
}
