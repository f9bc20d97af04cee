#pragma once

#include <cstdint>
#include <random>
#include <variant>

namespace hetfj {

struct Exponential {
    double rate;
    bool operator==(const Exponential&) const = default;
};

struct Pareto {
    double alpha;
    double scale;  // s_m, the minimum value
    bool operator==(const Pareto&) const = default;
};

struct Deterministic {
    double value;
    bool operator==(const Deterministic&) const = default;
};

/// Service or inter-arrival time distribution. Parameters are checked on
/// construction, so every Distribution object is valid.
class Distribution {
public:
    using Kind = std::variant<Exponential, Pareto, Deterministic>;

    static Distribution exponential(double rate);
    static Distribution pareto(double alpha, double scale);
    static Distribution deterministic(double value);

    /// Pareto with the given mean; requires alpha > 1.
    static Distribution pareto_with_mean(double alpha, double mean);

    const Kind& kind() const { return kind_; }

    bool has_finite_mean() const;
    bool has_finite_variance() const;

    double mean() const;
    double variance() const;

    double cdf(double x) const;
    double survival(double x) const;
    double pdf(double x) const;

    /// Lower end of the support.
    double support_min() const;

    bool operator==(const Distribution&) const = default;

private:
    explicit Distribution(Kind k) : kind_(k) {}
    Kind kind_;
};

/// Independent random stream addressed by (seed, stream_id). The pair fully
/// determines the sequence; different stream ids are decorrelated through a
/// SplitMix64 finalizer before seeding the engine.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on the open interval (0, 1).
    double uniform();

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

double sample(const Distribution& d, RngStream& rng);

/// Generalized harmonic number: sum_{j=x+1}^{y} j^{-z}. Throws std::domain_error when x > y.
double harmonic(unsigned x, unsigned y, unsigned z);

struct OrderStatMoments {
    double mean;
    double variance;
};

/// Mean and variance of the k-th smallest of n i.i.d. exponentials with the given rate.
OrderStatMoments order_stat_moments_exp(unsigned n, unsigned k, double rate);

/// Density of the k-th smallest of n i.i.d. draws from `base`, evaluated at x.
/// Zero outside the support of `base`. Deterministic bases have no density.
double order_stat_pdf(unsigned n, unsigned k, const Distribution& base, double x);

}  // namespace hetfj
