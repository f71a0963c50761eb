#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hrcal/eval.hpp"
#include "hrcal/features.hpp"
#include "hrcal/synth.hpp"

namespace hrcal::cli {

// Flat key = value file. '#' starts a comment; blank lines are ignored.
class Config {
public:
    static Config parse(const std::string& text, const std::string& origin = "<config>");
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string str(const std::string& key, const std::string& fallback) const;
    double num(const std::string& key, double fallback) const;
    long long integer(const std::string& key, long long fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    // Comma-separated list; an empty value gives an empty list.
    std::vector<std::string> list(const std::string& key, const std::vector<std::string>& fallback) const;
    std::vector<double> nums(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<int> ints(const std::string& key, const std::vector<int>& fallback) const;

    // Throws ConfigError naming every key that no accessor has read.
    void reject_unknown() const;

private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
    std::string origin_;
};

struct PipelineConfig {
    std::string data_dir;  // empty: synthesize the cohort in memory
    synth::CohortConfig cohort;
    features::ProcessingConfig processing;
    features::AssemblyConfig assembly;
    eval::EvalConfig eval;
    std::string model_dir;
    std::uint64_t seed = 0;
    int jobs = 1;
};

// Reads every recognised key; unknown keys are a ConfigError. Models listed
// in `methods` get their grids from the grid.* axes.
PipelineConfig build_pipeline_config(const Config& cfg);

// Sessions of the configured cohort reduced to grid-aligned signals.
std::vector<features::ProcessedSession> load_processed(const PipelineConfig& pc);

// Entry points used by the hrcal executable. Each returns a process exit code.
struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::string out_dir = ".";
};

int run_command(const std::string& command, const GlobalOptions& opts);

}  // namespace hrcal::cli
