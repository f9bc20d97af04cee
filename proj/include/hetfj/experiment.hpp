#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hetfj/config_file.hpp"
#include "hetfj/metrics.hpp"
#include "hetfj/model.hpp"
#include "hetfj/simengine.hpp"

namespace hetfj {

inline constexpr int kCsvSchemaVersion = 1;

/// Command-line adjustments applied on top of every sweep point.
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> jobs;
    std::optional<int> replications;
    std::optional<Policy> policy;
    bool allow_unstable = false;
    bool split_merge = false;
    std::vector<std::pair<std::string, std::string>> settings;  // key = value
};

struct SweepPoint {
    std::string series_value;
    std::string sweep_value;
    SystemConfig cfg;
};

/// One configuration per (series value, sweep value), series-major.
std::vector<SweepPoint> expand(const Scenario& sc, const RunOverrides& ov = {});

enum class PointStatus { Ok, Invalid, Unstable, Diverged };

std::string_view to_string(PointStatus s);

struct PointResult {
    SweepPoint point;
    PointStatus status = PointStatus::Ok;
    std::string message;
    std::optional<ValidatedConfig> cfg;
    RunResult result;
};

/// Runs cfg.sim.replications independent replications on up to `workers` threads.
std::vector<RawTrace> run_replications(const ValidatedConfig& cfg, int workers, const EngineOptions& base = {});

/// Runs every sweep point. Points and replications share one worker pool; the
/// result order is the sweep order whatever the completion order. Failures
/// (invalid, unstable, divergent) are recorded per point and never abort the sweep.
std::vector<PointResult> run_scenario(const Scenario& sc, const RunOverrides& ov, int workers);

/// One row per (point, class) with a header row; byte-identical for identical inputs.
void write_csv(std::ostream& os, const Scenario& sc, const std::vector<PointResult>& results);

/// Header row of the run CSV.
const std::vector<std::string>& csv_columns();

}  // namespace hetfj
