#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hetfj/model.hpp"

namespace hetfj {

/// Raised when a closed form is evaluated outside its stability region.
class InstabilityError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Stability (per-server utilization conditions)
// ---------------------------------------------------------------------------

/// (sum k_r lambda_r)(sum lambda_r l_r / k_r) < n f mu sum lambda_r
bool stability_fcfs(const SystemConfig& cfg);

/// sum lambda_r l_r < n f mu
bool stability_priority(const SystemConfig& cfg);

/// The condition that applies to cfg.policy.
bool is_stable(const SystemConfig& cfg);

// ---------------------------------------------------------------------------
// Single-server closed forms
// ---------------------------------------------------------------------------

/// M/M/1 sojourn time 1 / (mu_eff - lambda).
double mm1_latency(double lambda, double mu_eff);

/// Bits per joule with no idle power: l * 1000 / (p_on * mean_service).
double mm1_energy_efficiency(double l_kb, double p_on, double mean_service);

struct ServiceMoments {
    double lambda;
    double mean;
    double variance;
};

/// Per-class M/G/1 FCFS latency with a mixture service time (Pollaczek-Khinchine).
std::vector<double> fcfs_mg1_latency(std::span<const ServiceMoments> classes);

// ---------------------------------------------------------------------------
// Fork-join bounds
// ---------------------------------------------------------------------------

struct ClassLoad {
    int k;
    double lambda;
    double rate;        // effective per-server rate mu_i
    int priority_rank;  // 1 is highest
};

/// The subset of a configuration the bounds depend on. Classes keep the
/// configuration's listed order.
struct QueueingModel {
    int n = 1;
    std::vector<ClassLoad> classes;

    static QueueingModel from(const ValidatedConfig& cfg);
};

enum class BoundStatus { Valid, BoundInvalid, Unstable };

std::string_view to_string(BoundStatus s);

struct Bound {
    double value;
    BoundStatus status;

    bool valid() const { return status == BoundStatus::Valid; }
};

/// Cumulative split-merge load S_i = sum over classes at least as important as
/// `idx` of rho_r H^1_{n-k_r,n}. With strict = true the class itself is excluded (S_{i-1}).
double split_merge_load(const QueueingModel& m, std::size_t idx, bool strict = false);

/// Split-merge load over every class (S_R).
double split_merge_load_total(const QueueingModel& m);

std::vector<Bound> ub_fcfs(const QueueingModel& m);
std::vector<Bound> ub_npq(const QueueingModel& m);
std::vector<Bound> ub_pq(const QueueingModel& m);

std::vector<Bound> naive_lower(const QueueingModel& m);

/// Quantities of the sequential-stage lower bound for class `idx` at stage s (1-based).
struct StageContext {
    int s = 0;
    int finished_before = 0;                      // c_s
    std::vector<std::size_t> unfinished;          // classes with k_r >= s
    std::vector<std::size_t> higher_unfinished;   // R_s^i
    std::vector<double> load;                     // t_{s,r} for every class
    double residual = 1.0;                        // Z_s^i
};

StageContext stage_context(const QueueingModel& m, std::size_t idx, int s);

std::vector<Bound> lb_fcfs(const QueueingModel& m);
std::vector<Bound> lb_npq(const QueueingModel& m);

/// The stage numerator for the preemptive lower bound: the second-moment form
/// (default) or the first-moment expression some derivations end with.
enum class PqNumerator { SecondMoment, FirstMoment };

std::vector<Bound> lb_pq(const QueueingModel& m, PqNumerator numerator = PqNumerator::SecondMoment);

std::vector<Bound> lower_bound(const QueueingModel& m, Policy p);
std::vector<Bound> upper_bound(const QueueingModel& m, Policy p);

struct PolicyBounds {
    Bound lower;
    Bound upper;
};

struct ClassBounds {
    int class_id;
    Bound naive;
    std::array<PolicyBounds, 3> by_policy;  // indexed by Policy

    const PolicyBounds& operator[](Policy p) const { return by_policy[static_cast<std::size_t>(p)]; }
};

struct BoundReport {
    Policy policy;
    bool stable_fcfs;
    bool stable_priority;
    bool stable;  // for `policy`
    std::vector<ClassBounds> classes;
    std::vector<std::string> notes;
};

/// Stability verdicts plus naive, lower and upper bounds for every class and policy.
BoundReport bound_report(const ValidatedConfig& cfg);

}  // namespace hetfj
