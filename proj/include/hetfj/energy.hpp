#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "hetfj/model.hpp"
#include "hetfj/simengine.hpp"

namespace hetfj {

struct ServerTimes {
    double busy = 0.0;
    double linger = 0.0;
    double wake = 0.0;
    double low = 0.0;

    double active() const { return busy + linger + wake; }
    double total() const { return active() + low; }
};

struct EnergyLedger {
    std::vector<ServerTimes> servers;
    double window_start = 0.0;
    double window_end = 0.0;
    double t_active = 0.0;  // t_a, summed over servers
    double t_low = 0.0;     // t_l
    double energy_j = 0.0;

    double horizon() const { return window_end - window_start; }
};

/// Raised when phase logs overlap or leave gaps.
class LedgerError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Folds per-server phase logs, clipped to [start, end], into time and energy
/// totals. Every log must partition the window exactly.
EnergyLedger accumulate(std::span<const PhaseLog> logs, double start, double end, double p_on, double p_off);

/// Convenience overload over a simulated trace's measurement window.
EnergyLedger accumulate(const RawTrace& trace, const ValidatedConfig& cfg);

/// Data processed per joule: sum_i l_i N_i * 1000 / energy. Zero with no completions.
double efficiency(const EnergyLedger& ledger, std::span<const std::uint64_t> completed, const ValidatedConfig& cfg);

/// Same as above with explicit per-class file sizes (kb).
double efficiency(const EnergyLedger& ledger, std::span<const std::uint64_t> completed, std::span<const double> l_kb);

}  // namespace hetfj
