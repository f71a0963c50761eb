#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "pipeline.hpp"

namespace {

void configure_logging() {
    const char* level = std::getenv("HRCAL_LOG");
    spdlog::set_pattern("[%l] %v");
    spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();
    CLI::App app{"hrcal: wearable heart-rate post-calibration toolkit"};
    app.require_subcommand(1);

    hrcal::cli::GlobalOptions opts;
    std::uint64_t seed = 0;
    int jobs = 1;
    auto* seed_opt = app.add_option("--seed", seed, "random seed")->ignore_case();
    auto* jobs_opt = app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--config", opts.config_path, "key = value config file");
    app.add_option("--out", opts.out_dir, "output directory");

    const char* commands[][2] = {
        {"synth", "write a synthetic cohort"},
        {"extract-hr", "extract ECG reference heart rate"},
        {"features", "assemble the feature matrix"},
        {"select", "run feature selection over LOSO folds"},
        {"train", "fit the best model per method and state"},
        {"evaluate", "evaluate saved models"},
        {"validate", "compare raw device heart rate against the reference"},
        {"run", "full LOSO evaluation"},
    };
    for (const auto& c : commands) app.add_subcommand(c[0], c[1])->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    if (*seed_opt) opts.seed = seed;
    if (*jobs_opt) opts.jobs = jobs;
    return hrcal::cli::run_command(app.get_subcommands().front()->get_name(), opts);
}
