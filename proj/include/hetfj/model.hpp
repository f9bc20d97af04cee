#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hetfj/distributions.hpp"

namespace hetfj {

// Units: seconds, kilobits, jobs/s, watts, joules.

enum class Policy { Fcfs, NonPreemptivePriority, PreemptivePriority };

std::string_view to_string(Policy p);
std::optional<Policy> parse_policy(std::string_view s);

struct ServiceFamily {
    enum class Kind { Exponential, Pareto, Deterministic };
    Kind kind = Kind::Exponential;
    double alpha = 0.0;  // Pareto shape, unused otherwise

    bool operator==(const ServiceFamily&) const = default;
};

struct ArrivalFamily {
    enum class Kind { Poisson, ParetoRenewal };
    Kind kind = Kind::Poisson;
    double alpha = 0.0;

    bool operator==(const ArrivalFamily&) const = default;
};

struct DataClass {
    int id = 0;
    int k = 1;             // MDS recovery threshold
    double l = 1.0;        // file size, kb
    double lambda = 0.0;   // arrivals per second
    int r = 0;             // servers contacted per job; 0 means all n
    int priority_rank = 0; // 1 is highest; 0 means "listed order"

    bool operator==(const DataClass&) const = default;
};

struct PowerModel {
    double c0 = 203.13;  // max CPU power
    double p_a = 120.0;  // platform, active
    double c_l = 15.0;   // CPU, low power
    double p_l = 13.1;   // platform, low power
    double d_l = 5.0;    // linger before entering low power
    double w_l = 6.0;    // wake-up latency

    double p_on(double f) const { return c0 * f * f * f + p_a; }
    double p_off() const { return c_l + p_l; }

    bool operator==(const PowerModel&) const = default;
};

struct SimControls {
    std::int64_t horizon_jobs = 100000;
    std::int64_t warmup_jobs = -1;  // negative: 10% of horizon_jobs
    int replications = 10;
    std::uint64_t seed = 1;
    bool allow_unstable = false;
    bool split_merge = false;

    bool operator==(const SimControls&) const = default;
};

struct SystemConfig {
    int n = 10;
    double mu = 1.0;  // service rate per kilobit
    double f = 1.0;   // CPU frequency factor
    std::vector<DataClass> classes;
    Policy policy = Policy::Fcfs;
    ServiceFamily service;
    ArrivalFamily arrival;
    PowerModel power;
    SimControls sim;

    bool operator==(const SystemConfig&) const = default;
};

struct ConfigError {
    enum class Kind { Invalid, Unstable };
    Kind kind = Kind::Invalid;
    std::string path;
    std::string message;
};

std::string format_errors(std::span<const ConfigError> errors);

/// Thrown by validate_or_throw.
class ConfigInvalid : public std::runtime_error {
public:
    explicit ConfigInvalid(std::vector<ConfigError> errors);
    const std::vector<ConfigError>& errors() const { return errors_; }
    bool unstable_only() const;

private:
    std::vector<ConfigError> errors_;
};

/// A SystemConfig that passed validation, with normalized defaults and the
/// derived per-class quantities frozen. Only validate() produces one.
class ValidatedConfig {
public:
    const SystemConfig& config() const { return cfg_; }

    int n() const { return cfg_.n; }
    std::size_t num_classes() const { return cfg_.classes.size(); }
    const DataClass& cls(std::size_t idx) const { return cfg_.classes.at(idx); }
    Policy policy() const { return cfg_.policy; }

    /// Effective per-server service rate of class `idx`: k f mu / l.
    double rate(std::size_t idx) const { return rates_.at(idx); }
    std::span<const double> rates() const { return rates_; }

    double p_on() const { return p_on_; }
    double p_off() const { return p_off_; }

    /// Class indices, highest priority first.
    std::span<const std::size_t> priority_order() const { return by_priority_; }
    /// Class indices in nondecreasing k; ties by priority rank, then id.
    std::span<const std::size_t> k_order() const { return by_k_; }

    std::size_t index_of(int class_id) const;

    Distribution service_distribution(std::size_t idx) const;
    Distribution interarrival_distribution(std::size_t idx) const;

    bool operator==(const ValidatedConfig&) const = default;

private:
    friend std::variant<ValidatedConfig, std::vector<ConfigError>> validate(const SystemConfig&);
    ValidatedConfig() = default;

    SystemConfig cfg_;
    std::vector<double> rates_;
    std::vector<std::size_t> by_priority_;
    std::vector<std::size_t> by_k_;
    double p_on_ = 0.0;
    double p_off_ = 0.0;
};

using ValidationResult = std::variant<ValidatedConfig, std::vector<ConfigError>>;

ValidationResult validate(const SystemConfig& cfg);
ValidatedConfig validate_or_throw(const SystemConfig& cfg);

/// k f mu / l for the class with the given id. Throws std::out_of_range for unknown ids.
double effective_rate(const ValidatedConfig& cfg, int class_id);

/// The two-class setup used throughout the experiments: n = 10, (k1, k2) = (5, 5),
/// lambda = (0.15, 0.5), l = 1 kb, mu = 1/6, f = 1, FCFS.
SystemConfig default_two_class_config();

}  // namespace hetfj
