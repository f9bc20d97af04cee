#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "hetfj/experiment.hpp"

namespace hetfj {

// Exit codes shared by the subcommands.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;       // unreadable or malformed input
inline constexpr int kExitInvalid = 2;     // configuration rejected
inline constexpr int kExitPointFailed = 3; // run finished but some sweep points did not

struct CommandIo {
    std::ostream& out;
    std::ostream& err;
};

/// Stability verdict and the bound table for every sweep point. Writes
/// <out_dir>/<scenario>_bounds.csv when out_dir is set. Unstable
/// configurations are analysed (verdict UNSTABLE) rather than rejected.
int cmd_bounds(const std::filesystem::path& config, const RunOverrides& ov,
               const std::optional<std::filesystem::path>& out_dir, CommandIo io);

struct RunRequest {
    std::filesystem::path config;
    RunOverrides overrides;
    int workers = 1;
    std::filesystem::path out_dir = "out";
    /// Job trace of replication 0 at the first sweep point.
    std::optional<std::filesystem::path> trace;
};

/// Simulates every sweep point and writes <out_dir>/<scenario>.csv.
int cmd_run(const RunRequest& req, CommandIo io);

int cmd_sweep_report(const std::filesystem::path& csv_dir, const std::filesystem::path& out_dir, CommandIo io);

}  // namespace hetfj
