#include "hetfj/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

namespace hetfj {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kBatches = 20;

struct MeanSd {
    double mean;
    double sd;
};

MeanSd mean_sd(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, xs.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

double nearest_rank(std::span<const double> sorted, double p) {
    const auto n = sorted.size();
    auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(n)));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
}

}  // namespace

double t_critical(double confidence, double dof) {
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, 0.5 + confidence / 2.0);
}

double ClassMetrics::ci_half_width(double confidence) const {
    if (!ci_defined) return kNaN;
    return t_critical(confidence, dof) * std_error;
}

ReplicationSummary reduce(const RawTrace& trace, const ValidatedConfig& cfg) {
    ReplicationSummary out;
    out.latencies.resize(cfg.num_classes());
    for (const auto& j : trace.jobs) out.latencies[cfg.index_of(j.class_id)].push_back(j.latency());
    out.completed = trace.completed;
    out.ledger = accumulate(trace, cfg);
    out.ledger.servers.clear();
    return out;
}

RunResult summarize(std::span<const RawTrace> replications, const ValidatedConfig& cfg) {
    std::vector<ReplicationSummary> reduced;
    reduced.reserve(replications.size());
    for (const auto& tr : replications) reduced.push_back(reduce(tr, cfg));
    return summarize(std::span<const ReplicationSummary>(reduced), cfg);
}

RunResult summarize(std::span<const ReplicationSummary> replications, const ValidatedConfig& cfg) {
    RunResult out;
    const std::size_t R = cfg.num_classes();
    out.replications = static_cast<int>(replications.size());

    std::vector<double> l_kb;
    for (std::size_t i = 0; i < R; ++i) l_kb.push_back(cfg.cls(i).l);

    double window_total = 0.0;
    double bits = 0.0;
    std::vector<double> rep_efficiency;
    for (const auto& rep : replications) {
        const auto& ledger = rep.ledger;
        out.t_active += ledger.t_active;
        out.t_low += ledger.t_low;
        out.energy_j += ledger.energy_j;
        window_total += ledger.horizon();
        for (std::size_t i = 0; i < R; ++i) bits += l_kb[i] * 1000.0 * static_cast<double>(rep.completed[i]);
        if (ledger.horizon() > 0.0) rep_efficiency.push_back(efficiency(ledger, rep.completed, l_kb));
    }
    out.efficiency = out.energy_j > 0.0 ? bits / out.energy_j : 0.0;
    if (rep_efficiency.size() >= 2) {
        const auto ms = mean_sd(rep_efficiency);
        const double df = static_cast<double>(rep_efficiency.size() - 1);
        out.efficiency_ci95 = t_critical(0.95, df) * ms.sd / std::sqrt(df + 1.0);
    }

    for (std::size_t i = 0; i < R; ++i) {
        ClassMetrics cm;
        cm.class_id = cfg.cls(i).id;
        std::vector<double> pooled;
        for (const auto& rep : replications) pooled.insert(pooled.end(), rep.latencies[i].begin(), rep.latencies[i].end());
        cm.completed = pooled.size();
        cm.throughput = window_total > 0.0 ? static_cast<double>(pooled.size()) / window_total : 0.0;
        if (pooled.empty()) {
            cm.mean_latency = cm.p50 = cm.p95 = cm.p99 = kNaN;
            cm.std_error = cm.ci95_half_width = kNaN;
            out.classes.push_back(cm);
            continue;
        }
        cm.missing = false;
        cm.mean_latency = std::accumulate(pooled.begin(), pooled.end(), 0.0) / static_cast<double>(pooled.size());

        // Replication means when there are at least two replications with data,
        // batch means of the single replication otherwise.
        std::vector<double> groups;
        for (const auto& rep : replications)
            if (const auto& v = rep.latencies[i]; !v.empty()) groups.push_back(std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()));
        if (groups.size() < 2) {
            groups.clear();
            const auto& only = std::find_if(replications.begin(), replications.end(), [i](const auto& rep) {
                                   return !rep.latencies[i].empty();
                               })->latencies[i];
            if (only.size() >= kBatches) {
                const std::size_t size = only.size() / kBatches;
                for (std::size_t b = 0; b < kBatches; ++b) {
                    const auto first = only.begin() + static_cast<std::ptrdiff_t>(b * size);
                    const auto last = b + 1 == kBatches ? only.end() : first + static_cast<std::ptrdiff_t>(size);
                    groups.push_back(std::accumulate(first, last, 0.0) / static_cast<double>(last - first));
                }
            }
        }
        if (groups.size() >= 2) {
            const auto ms = mean_sd(groups);
            cm.ci_defined = true;
            cm.dof = static_cast<double>(groups.size() - 1);
            cm.std_error = ms.sd / std::sqrt(static_cast<double>(groups.size()));
            cm.ci95_half_width = cm.ci_half_width(0.95);
        } else {
            cm.std_error = cm.ci95_half_width = kNaN;
        }

        std::sort(pooled.begin(), pooled.end());
        cm.p50 = nearest_rank(pooled, 0.50);
        cm.p95 = nearest_rank(pooled, 0.95);
        cm.p99 = nearest_rank(pooled, 0.99);
        out.classes.push_back(cm);
    }

    for (const auto& s : storage_and_bandwidth(cfg)) out.storage_per_file.push_back(s.storage_kb);
    return out;
}

std::vector<StorageFigures> storage_and_bandwidth(const ValidatedConfig& cfg) {
    std::vector<StorageFigures> out;
    for (std::size_t i = 0; i < cfg.num_classes(); ++i) {
        const auto& c = cfg.cls(i);
        const double ratio = static_cast<double>(cfg.n()) / c.k;
        out.push_back({ratio * c.l, ratio});
    }
    return out;
}

}  // namespace hetfj
