#include "hetfj/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hetfj {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Distribution Distribution::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate))
        throw std::invalid_argument("exponential rate must be positive, got " + std::to_string(rate));
    return Distribution(Exponential{rate});
}

Distribution Distribution::pareto(double alpha, double scale) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("pareto alpha must be positive");
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("pareto scale must be positive");
    return Distribution(Pareto{alpha, scale});
}

Distribution Distribution::deterministic(double value) {
    if (!(value >= 0.0) || !std::isfinite(value))
        throw std::invalid_argument("deterministic value must be nonnegative");
    return Distribution(Deterministic{value});
}

Distribution Distribution::pareto_with_mean(double alpha, double mean) {
    if (!(alpha > 1.0))
        throw std::invalid_argument("mean-matched pareto needs alpha > 1 (finite mean)");
    if (!(mean > 0.0))
        throw std::invalid_argument("mean-matched pareto needs a positive mean");
    return pareto(alpha, (alpha - 1.0) * mean / alpha);
}

bool Distribution::has_finite_mean() const {
    if (auto* p = std::get_if<Pareto>(&kind_)) return p->alpha > 1.0;
    return true;
}

bool Distribution::has_finite_variance() const {
    if (auto* p = std::get_if<Pareto>(&kind_)) return p->alpha > 2.0;
    return true;
}

double Distribution::mean() const {
    return std::visit(overloaded{
                          [](const Exponential& e) { return 1.0 / e.rate; },
                          [](const Pareto& p) {
                              return p.alpha > 1.0 ? p.alpha * p.scale / (p.alpha - 1.0) : kInf;
                          },
                          [](const Deterministic& d) { return d.value; },
                      },
                      kind_);
}

double Distribution::variance() const {
    return std::visit(overloaded{
                          [](const Exponential& e) { return 1.0 / (e.rate * e.rate); },
                          [](const Pareto& p) {
                              if (p.alpha <= 2.0) return kInf;
                              const double a = p.alpha;
                              return p.scale * p.scale * a / ((a - 1.0) * (a - 1.0) * (a - 2.0));
                          },
                          [](const Deterministic&) { return 0.0; },
                      },
                      kind_);
}

double Distribution::cdf(double x) const {
    return std::visit(overloaded{
                          [x](const Exponential& e) { return x <= 0.0 ? 0.0 : -std::expm1(-e.rate * x); },
                          [x](const Pareto& p) {
                              return x < p.scale ? 0.0 : 1.0 - std::pow(p.scale / x, p.alpha);
                          },
                          [x](const Deterministic& d) { return x < d.value ? 0.0 : 1.0; },
                      },
                      kind_);
}

double Distribution::survival(double x) const {
    return std::visit(overloaded{
                          [x](const Exponential& e) { return x <= 0.0 ? 1.0 : std::exp(-e.rate * x); },
                          [x](const Pareto& p) { return x < p.scale ? 1.0 : std::pow(p.scale / x, p.alpha); },
                          [x](const Deterministic& d) { return x < d.value ? 1.0 : 0.0; },
                      },
                      kind_);
}

double Distribution::pdf(double x) const {
    return std::visit(overloaded{
                          [x](const Exponential& e) { return x < 0.0 ? 0.0 : e.rate * std::exp(-e.rate * x); },
                          [x](const Pareto& p) {
                              return x < p.scale ? 0.0 : p.alpha * std::pow(p.scale, p.alpha) / std::pow(x, p.alpha + 1.0);
                          },
                          [](const Deterministic&) -> double {
                              throw std::domain_error("deterministic distribution has no density");
                          },
                      },
                      kind_);
}

double Distribution::support_min() const {
    return std::visit(overloaded{
                          [](const Exponential&) { return 0.0; },
                          [](const Pareto& p) { return p.scale; },
                          [](const Deterministic& d) { return d.value; },
                      },
                      kind_);
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), engine_(splitmix64(splitmix64(seed) ^ splitmix64(~stream_id))) {}

double RngStream::uniform() {
    // 53 random mantissa bits, shifted by half an ulp so 0 is never returned.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t bound) {
    // Lemire's nearly-divisionless method; portable and exact.
    unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * bound;
    auto low = static_cast<std::uint64_t>(m);
    if (low < bound) {
        const std::uint64_t threshold = -bound % bound;
        while (low < threshold) {
            m = static_cast<unsigned __int128>(engine_()) * bound;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double sample(const Distribution& d, RngStream& rng) {
    return std::visit(overloaded{
                          [&rng](const Exponential& e) { return -std::log(rng.uniform()) / e.rate; },
                          [&rng](const Pareto& p) { return p.scale * std::pow(rng.uniform(), -1.0 / p.alpha); },
                          [](const Deterministic& v) { return v.value; },
                      },
                      d.kind());
}

double harmonic(unsigned x, unsigned y, unsigned z) {
    if (x > y) throw std::domain_error("harmonic: lower index exceeds upper index");
    if (z == 0) throw std::domain_error("harmonic: order must be positive");
    // Smallest terms first.
    double sum = 0.0;
    for (unsigned j = y; j > x; --j) sum += std::pow(static_cast<double>(j), -static_cast<double>(z));
    return sum;
}

OrderStatMoments order_stat_moments_exp(unsigned n, unsigned k, double rate) {
    if (k == 0 || k > n) throw std::domain_error("order statistic index must satisfy 1 <= k <= n");
    if (!(rate > 0.0)) throw std::domain_error("rate must be positive");
    return {harmonic(n - k, n, 1) / rate, harmonic(n - k, n, 2) / (rate * rate)};
}

double order_stat_pdf(unsigned n, unsigned k, const Distribution& base, double x) {
    if (k == 0 || k > n) throw std::domain_error("order statistic index must satisfy 1 <= k <= n");
    const double f = base.pdf(x);
    if (f == 0.0) return 0.0;
    const double F = base.cdf(x);
    const double S = base.survival(x);
    // n! / ((k-1)! (n-k)!)
    const double log_coef = std::lgamma(n + 1.0) - std::lgamma(static_cast<double>(k)) - std::lgamma(n - k + 1.0);
    double log_val = log_coef + std::log(f);
    if (k > 1) {
        if (F <= 0.0) return 0.0;
        log_val += (k - 1.0) * std::log(F);
    }
    if (n > k) {
        if (S <= 0.0) return 0.0;
        log_val += (n - k) * std::log(S);
    }
    return std::exp(log_val);
}

}  // namespace hetfj
