#include "hetfj/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "hetfj/bounds.hpp"

namespace hetfj {

std::string_view to_string(Policy p) {
    switch (p) {
        case Policy::Fcfs: return "fcfs";
        case Policy::NonPreemptivePriority: return "npq";
        case Policy::PreemptivePriority: return "pq";
    }
    return "?";
}

std::optional<Policy> parse_policy(std::string_view s) {
    if (s == "fcfs" || s == "FCFS") return Policy::Fcfs;
    if (s == "npq" || s == "N-PQ" || s == "non-preemptive") return Policy::NonPreemptivePriority;
    if (s == "pq" || s == "PQ" || s == "preemptive") return Policy::PreemptivePriority;
    return std::nullopt;
}

std::string format_errors(std::span<const ConfigError> errors) {
    std::ostringstream os;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (i) os << "; ";
        os << errors[i].path << ": " << errors[i].message;
    }
    return os.str();
}

ConfigInvalid::ConfigInvalid(std::vector<ConfigError> errors)
    : std::runtime_error("invalid configuration: " + format_errors(errors)), errors_(std::move(errors)) {}

bool ConfigInvalid::unstable_only() const {
    return !errors_.empty() && std::all_of(errors_.begin(), errors_.end(), [](const ConfigError& e) {
        return e.kind == ConfigError::Kind::Unstable;
    });
}

std::size_t ValidatedConfig::index_of(int class_id) const {
    for (std::size_t i = 0; i < cfg_.classes.size(); ++i)
        if (cfg_.classes[i].id == class_id) return i;
    throw std::out_of_range("unknown class id " + std::to_string(class_id));
}

Distribution ValidatedConfig::service_distribution(std::size_t idx) const {
    const double rate = rates_.at(idx);
    switch (cfg_.service.kind) {
        case ServiceFamily::Kind::Exponential: return Distribution::exponential(rate);
        case ServiceFamily::Kind::Pareto: return Distribution::pareto_with_mean(cfg_.service.alpha, 1.0 / rate);
        case ServiceFamily::Kind::Deterministic: return Distribution::deterministic(1.0 / rate);
    }
    throw std::logic_error("unhandled service family");
}

Distribution ValidatedConfig::interarrival_distribution(std::size_t idx) const {
    const double lambda = cfg_.classes.at(idx).lambda;
    switch (cfg_.arrival.kind) {
        case ArrivalFamily::Kind::Poisson: return Distribution::exponential(lambda);
        case ArrivalFamily::Kind::ParetoRenewal: return Distribution::pareto_with_mean(cfg_.arrival.alpha, 1.0 / lambda);
    }
    throw std::logic_error("unhandled arrival family");
}

namespace {

std::string class_path(std::size_t i, const char* field) {
    return "class[" + std::to_string(i + 1) + "]." + field;
}

}  // namespace

ValidationResult validate(const SystemConfig& input) {
    std::vector<ConfigError> errs;
    auto fail = [&errs](std::string path, std::string msg) {
        errs.push_back({ConfigError::Kind::Invalid, std::move(path), std::move(msg)});
    };

    SystemConfig cfg = input;

    if (cfg.n < 1) fail("n", "server count must be at least 1");
    if (!(cfg.mu > 0.0) || !std::isfinite(cfg.mu)) fail("mu", "service rate per kilobit must be positive");
    if (!(cfg.f > 0.0 && cfg.f <= 1.0)) fail("f", "CPU frequency factor must lie in (0, 1]");
    if (cfg.classes.empty()) fail("classes", "at least one data class is required");

    std::set<int> ids, ranks;
    for (std::size_t i = 0; i < cfg.classes.size(); ++i) {
        auto& c = cfg.classes[i];
        if (c.r == 0) c.r = cfg.n;
        if (c.priority_rank == 0) c.priority_rank = static_cast<int>(i) + 1;

        if (!ids.insert(c.id).second) fail(class_path(i, "id"), "duplicate class id");
        if (c.k < 1 || c.k > cfg.n) fail(class_path(i, "k"), "k out of range");
        if (c.r > cfg.n || c.r < 1) fail(class_path(i, "r"), "redundancy out of range");
        else if (c.r < c.k) fail(class_path(i, "r"), "redundancy below recovery threshold");
        if (!(c.lambda > 0.0) || !std::isfinite(c.lambda)) fail(class_path(i, "lambda"), "arrival rate must be positive");
        if (!(c.l > 0.0) || !std::isfinite(c.l)) fail(class_path(i, "l"), "file size must be positive");
        if (c.priority_rank < 1) fail(class_path(i, "priority"), "priority rank must be positive");
        else if (!ranks.insert(c.priority_rank).second) fail(class_path(i, "priority"), "duplicate priority rank");
    }

    if (cfg.service.kind == ServiceFamily::Kind::Pareto && !(cfg.service.alpha > 1.0))
        fail("service.alpha", "pareto service needs alpha > 1 (finite mean)");
    if (cfg.arrival.kind == ArrivalFamily::Kind::ParetoRenewal && !(cfg.arrival.alpha > 1.0))
        fail("arrival.alpha", "pareto arrivals need alpha > 1 (finite mean)");

    const auto& pw = cfg.power;
    const std::pair<const char*, double> power_fields[] = {{"power.c0", pw.c0},   {"power.p_a", pw.p_a},
                                                           {"power.c_l", pw.c_l}, {"power.p_l", pw.p_l},
                                                           {"power.d_l", pw.d_l}, {"power.w_l", pw.w_l}};
    for (auto [path, v] : power_fields)
        if (!(v >= 0.0) || !std::isfinite(v)) fail(path, "must be nonnegative");

    auto& sim = cfg.sim;
    if (sim.horizon_jobs < 1) fail("sim.jobs", "horizon must be at least one job");
    if (sim.warmup_jobs < 0) sim.warmup_jobs = sim.horizon_jobs / 10;
    if (sim.warmup_jobs >= sim.horizon_jobs) fail("sim.warmup", "warm-up must be shorter than the horizon");
    if (sim.replications < 1) fail("sim.replications", "at least one replication is required");

    if (errs.empty() && !sim.allow_unstable && !is_stable(cfg)) {
        errs.push_back({ConfigError::Kind::Unstable, "classes",
                        cfg.policy == Policy::Fcfs ? "unstable: FCFS stability condition violated"
                                                   : "unstable: total load sum(lambda l) >= n f mu"});
    }
    if (!errs.empty()) return errs;

    ValidatedConfig v;
    v.cfg_ = cfg;
    const std::size_t R = cfg.classes.size();
    for (const auto& c : cfg.classes) v.rates_.push_back(c.k * cfg.f * cfg.mu / c.l);
    v.by_priority_.resize(R);
    std::iota(v.by_priority_.begin(), v.by_priority_.end(), std::size_t{0});
    std::sort(v.by_priority_.begin(), v.by_priority_.end(), [&](std::size_t a, std::size_t b) {
        return cfg.classes[a].priority_rank < cfg.classes[b].priority_rank;
    });
    v.by_k_ = v.by_priority_;
    std::stable_sort(v.by_k_.begin(), v.by_k_.end(), [&](std::size_t a, std::size_t b) {
        const auto& ca = cfg.classes[a];
        const auto& cb = cfg.classes[b];
        if (ca.k != cb.k) return ca.k < cb.k;
        if (ca.priority_rank != cb.priority_rank) return ca.priority_rank < cb.priority_rank;
        return ca.id < cb.id;
    });
    v.p_on_ = pw.p_on(cfg.f);
    v.p_off_ = pw.p_off();
    return v;
}

ValidatedConfig validate_or_throw(const SystemConfig& cfg) {
    auto res = validate(cfg);
    if (auto* errs = std::get_if<std::vector<ConfigError>>(&res)) throw ConfigInvalid(std::move(*errs));
    return std::get<ValidatedConfig>(std::move(res));
}

double effective_rate(const ValidatedConfig& cfg, int class_id) { return cfg.rate(cfg.index_of(class_id)); }

SystemConfig default_two_class_config() {
    SystemConfig cfg;
    cfg.n = 10;
    cfg.mu = 1.0 / 6.0;
    cfg.f = 1.0;
    cfg.classes = {
        DataClass{.id = 1, .k = 5, .l = 1.0, .lambda = 0.15, .r = 10, .priority_rank = 1},
        DataClass{.id = 2, .k = 5, .l = 1.0, .lambda = 0.5, .r = 10, .priority_rank = 2},
    };
    cfg.policy = Policy::Fcfs;
    return cfg;
}

}  // namespace hetfj
