#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hetfj/bounds.hpp"
#include "hetfj/energy.hpp"
#include "hetfj/model.hpp"
#include "hetfj/simengine.hpp"

namespace hetfj {

struct ClassMetrics {
    int class_id = 0;
    std::uint64_t completed = 0;
    bool missing = true;  // no post-warm-up samples

    double mean_latency = 0.0;
    // Uncertainty of the mean. Undefined (NaN, ci_defined == false) with a
    // single replication holding fewer than 20 samples.
    bool ci_defined = false;
    double std_error = 0.0;
    double dof = 0.0;
    double ci95_half_width = 0.0;

    // Nearest-rank percentiles over the pooled sample.
    double p50 = 0.0;
    double p95 = 0.0;
    double p99 = 0.0;

    double throughput = 0.0;  // jobs/s over the measurement windows

    /// Half-width of the two-sided t interval at the given confidence.
    double ci_half_width(double confidence) const;
};

struct RunResult {
    std::vector<ClassMetrics> classes;
    int replications = 0;

    // Totals over every replication's measurement window.
    double t_active = 0.0;
    double t_low = 0.0;
    double energy_j = 0.0;
    double efficiency = 0.0;  // bits/J, total data over total energy
    double efficiency_ci95 = 0.0;  // from per-replication efficiencies; 0 with one replication

    std::vector<double> storage_per_file;  // kb, n l_i / k_i
    std::optional<BoundReport> bounds;
};

/// Two-sided Student-t critical value for the given confidence and degrees of freedom.
double t_critical(double confidence, double dof);

/// What summarize keeps of one replication: latencies grouped by class and
/// the energy ledger of its measurement window.
struct ReplicationSummary {
    std::vector<std::vector<double>> latencies;  // per class index, completion order
    std::vector<std::uint64_t> completed;
    EnergyLedger ledger;
};

ReplicationSummary reduce(const RawTrace& trace, const ValidatedConfig& cfg);

/// Per-class latency statistics plus energy totals over one or more replications.
RunResult summarize(std::span<const ReplicationSummary> replications, const ValidatedConfig& cfg);
RunResult summarize(std::span<const RawTrace> replications, const ValidatedConfig& cfg);

struct StorageFigures {
    double storage_kb;
    double write_bandwidth_ratio;
};

std::vector<StorageFigures> storage_and_bandwidth(const ValidatedConfig& cfg);

}  // namespace hetfj
