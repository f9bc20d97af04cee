// Command-line front end: bounds, run, sweep-report.

#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "hetfj/commands.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> jobs;
    std::optional<int> replications;
    std::string policy;
    bool allow_unstable = false;
    bool split_merge = false;
    std::vector<std::string> settings;

    hetfj::RunOverrides overrides() const {
        hetfj::RunOverrides ov;
        ov.seed = seed;
        ov.jobs = jobs;
        ov.replications = replications;
        if (!policy.empty()) ov.policy = hetfj::parse_policy(policy);
        ov.allow_unstable = allow_unstable;
        ov.split_merge = split_merge;
        for (const auto& s : settings) {
            const auto eq = s.find('=');
            ov.settings.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
        return ov;
    }
};

void add_common(CLI::App* app, CommonFlags& f) {
    app->add_option("-c,--config", f.config, "Scenario file")->required()->check(CLI::ExistingFile);
    app->add_option("--seed", f.seed, "Master seed");
    app->add_option("--jobs", f.jobs, "Completed jobs per replication, warm-up included")
        ->check(CLI::PositiveNumber);
    app->add_option("--replications", f.replications, "Independent replications per point")
        ->check(CLI::PositiveNumber);
    app->add_option("--policy", f.policy, "Scheduling policy override")
        ->check(CLI::IsMember({"fcfs", "npq", "pq"}));
    app->add_flag("--allow-unstable", f.allow_unstable, "Simulate configurations outside the stability region");
    app->add_flag("--split-merge", f.split_merge, "Run the engine as a split-merge system");
    app->add_option("--set", f.settings, "Extra setting key=value, applied to every point")
        ->check([](const std::string& s) { return s.find('=') == std::string::npos ? "expected key=value" : ""; });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fork-join erasure-coded storage simulator and latency bounds"};
    app.require_subcommand(1);

    CommonFlags bounds_flags;
    std::string bounds_out;
    auto* bounds = app.add_subcommand("bounds", "Stability verdict and analytic latency bounds");
    add_common(bounds, bounds_flags);
    bounds->add_option("-o,--out", bounds_out, "Directory for <scenario>_bounds.csv");

    CommonFlags run_flags;
    std::string run_out = "out";
    std::string trace;
    const unsigned hw = std::thread::hardware_concurrency();
    int workers = hw ? static_cast<int>(hw) : 1;
    auto* run = app.add_subcommand("run", "Simulate a scenario and write <out>/<scenario>.csv");
    add_common(run, run_flags);
    run->add_option("-o,--out", run_out, "Output directory")->capture_default_str();
    run->add_option("-w,--workers", workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    run->add_option("--trace", trace, "Write the job trace of replication 0 at the first point");

    std::string report_in;
    std::string report_out = "plots";
    auto* report = app.add_subcommand("sweep-report", "Turn run CSVs into plot data files");
    report->add_option("csv_dir", report_in, "Directory holding run CSVs")->required();
    report->add_option("-o,--out", report_out, "Output directory")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    hetfj::CommandIo io{std::cout, std::cerr};
    if (*bounds) {
        std::optional<std::filesystem::path> out;
        if (!bounds_out.empty()) out = bounds_out;
        return hetfj::cmd_bounds(bounds_flags.config, bounds_flags.overrides(), out, io);
    }
    if (*run) {
        hetfj::RunRequest req;
        req.config = run_flags.config;
        req.overrides = run_flags.overrides();
        req.workers = workers;
        req.out_dir = run_out;
        if (!trace.empty()) req.trace = trace;
        return hetfj::cmd_run(req, io);
    }
    return hetfj::cmd_sweep_report(report_in, report_out, io);
}
