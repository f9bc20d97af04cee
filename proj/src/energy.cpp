#include "hetfj/energy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hetfj {

namespace {

double& slot(ServerTimes& t, PowerPhase p) {
    switch (p) {
        case PowerPhase::Busy: return t.busy;
        case PowerPhase::Linger: return t.linger;
        case PowerPhase::LowPower: return t.low;
        case PowerPhase::Waking: return t.wake;
    }
    return t.low;
}

bool near(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * std::max(1.0, scale); }

}  // namespace

EnergyLedger accumulate(std::span<const PhaseLog> logs, double start, double end, double p_on, double p_off) {
    if (!(end >= start)) throw LedgerError("window end precedes start");
    EnergyLedger ledger;
    ledger.window_start = start;
    ledger.window_end = end;
    ledger.servers.resize(logs.size());
    const double scale = std::max(std::abs(start), std::abs(end));

    for (std::size_t s = 0; s < logs.size(); ++s) {
        const auto& log = logs[s];
        auto& times = ledger.servers[s];
        double cursor = log.empty() ? start : log.front().start;
        for (const auto& rec : log) {
            if (!(rec.end >= rec.start)) throw LedgerError("server " + std::to_string(s) + ": negative interval");
            if (rec.start < cursor && !near(rec.start, cursor, scale))
                throw LedgerError("server " + std::to_string(s) + ": overlapping phase intervals");
            if (rec.start > cursor && !near(rec.start, cursor, scale))
                throw LedgerError("server " + std::to_string(s) + ": gap in phase log");
            cursor = rec.end;
            const double lo = std::max(rec.start, start);
            const double hi = std::min(rec.end, end);
            if (hi > lo) slot(times, rec.phase) += hi - lo;
        }
        if (end > start) {
            const bool covers = !log.empty() && log.front().start <= start + 1e-9 * std::max(1.0, scale) &&
                                log.back().end >= end - 1e-9 * std::max(1.0, scale);
            if (!covers) throw LedgerError("server " + std::to_string(s) + ": phase log does not cover the window");
        }
        ledger.t_active += times.active();
        ledger.t_low += times.low;
    }
    ledger.energy_j = p_on * ledger.t_active + p_off * ledger.t_low;
    return ledger;
}

EnergyLedger accumulate(const RawTrace& trace, const ValidatedConfig& cfg) {
    return accumulate(trace.phase_logs, trace.window_start, trace.end_time, cfg.p_on(), cfg.p_off());
}

double efficiency(const EnergyLedger& ledger, std::span<const std::uint64_t> completed, std::span<const double> l_kb) {
    if (!(ledger.horizon() > 0.0)) throw std::domain_error("efficiency needs a positive horizon");
    double bits = 0.0;
    for (std::size_t i = 0; i < completed.size(); ++i) bits += l_kb[i] * 1000.0 * static_cast<double>(completed[i]);
    if (bits == 0.0) return 0.0;
    if (!(ledger.energy_j > 0.0)) throw std::domain_error("efficiency needs positive energy");
    return bits / ledger.energy_j;
}

double efficiency(const EnergyLedger& ledger, std::span<const std::uint64_t> completed, const ValidatedConfig& cfg) {
    std::vector<double> l;
    for (std::size_t i = 0; i < cfg.num_classes(); ++i) l.push_back(cfg.cls(i).l);
    return efficiency(ledger, completed, l);
}

}  // namespace hetfj
