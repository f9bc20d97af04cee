#include "hetfj/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hetfj {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Bound ok(double v) { return {v, BoundStatus::Valid}; }
Bound invalid() { return {kNaN, BoundStatus::BoundInvalid}; }
Bound unstable() { return {kNaN, BoundStatus::Unstable}; }

double h1(const QueueingModel& m, const ClassLoad& c) {
    return harmonic(static_cast<unsigned>(m.n - c.k), static_cast<unsigned>(m.n), 1);
}

double h2(const QueueingModel& m, const ClassLoad& c) {
    return harmonic(static_cast<unsigned>(m.n - c.k), static_cast<unsigned>(m.n), 2);
}

// lambda_r E[X_{k_r,n}^2] for the split-merge service time of class r.
double sm_second_moment_term(const QueueingModel& m, const ClassLoad& c) {
    const double a = h1(m, c);
    return c.lambda * (h2(m, c) + a * a) / (c.rate * c.rate);
}

bool at_least_as_important(const ClassLoad& r, const ClassLoad& i) { return r.priority_rank <= i.priority_rank; }

}  // namespace

bool stability_fcfs(const SystemConfig& cfg) {
    double k_lambda = 0.0, lambda_l_over_k = 0.0, lambda = 0.0;
    for (const auto& c : cfg.classes) {
        k_lambda += c.k * c.lambda;
        lambda_l_over_k += c.lambda * c.l / c.k;
        lambda += c.lambda;
    }
    return k_lambda * lambda_l_over_k < cfg.n * cfg.f * cfg.mu * lambda;
}

bool stability_priority(const SystemConfig& cfg) {
    double load = 0.0;
    for (const auto& c : cfg.classes) load += c.lambda * c.l;
    return load < cfg.n * cfg.f * cfg.mu;
}

bool is_stable(const SystemConfig& cfg) {
    return cfg.policy == Policy::Fcfs ? stability_fcfs(cfg) : stability_priority(cfg);
}

double mm1_latency(double lambda, double mu_eff) {
    if (!(mu_eff > lambda)) throw InstabilityError("M/M/1 requires mu_eff > lambda");
    return 1.0 / (mu_eff - lambda);
}

double mm1_energy_efficiency(double l_kb, double p_on, double mean_service) {
    return l_kb * 1000.0 / (p_on * mean_service);
}

std::vector<double> fcfs_mg1_latency(std::span<const ServiceMoments> classes) {
    double rho = 0.0, second = 0.0;
    for (const auto& c : classes) {
        rho += c.lambda * c.mean;
        second += c.lambda * (c.variance + c.mean * c.mean);
    }
    if (!(rho < 1.0)) throw InstabilityError("M/G/1 utilization must be below 1");
    const double wait = second / (2.0 * (1.0 - rho));
    std::vector<double> out;
    out.reserve(classes.size());
    for (const auto& c : classes) out.push_back(c.mean + wait);
    return out;
}

QueueingModel QueueingModel::from(const ValidatedConfig& cfg) {
    QueueingModel m;
    m.n = cfg.n();
    for (std::size_t i = 0; i < cfg.num_classes(); ++i) {
        const auto& c = cfg.cls(i);
        m.classes.push_back({c.k, c.lambda, cfg.rate(i), c.priority_rank});
    }
    return m;
}

std::string_view to_string(BoundStatus s) {
    switch (s) {
        case BoundStatus::Valid: return "valid";
        case BoundStatus::BoundInvalid: return "bound-invalid";
        case BoundStatus::Unstable: return "unstable";
    }
    return "?";
}

double split_merge_load(const QueueingModel& m, std::size_t idx, bool strict) {
    const auto& ci = m.classes.at(idx);
    double s = 0.0;
    for (const auto& c : m.classes) {
        const bool counted = strict ? c.priority_rank < ci.priority_rank : at_least_as_important(c, ci);
        if (counted) s += c.lambda / c.rate * h1(m, c);
    }
    return s;
}

double split_merge_load_total(const QueueingModel& m) {
    double s = 0.0;
    for (const auto& c : m.classes) s += c.lambda / c.rate * h1(m, c);
    return s;
}

std::vector<Bound> ub_fcfs(const QueueingModel& m) {
    const double load = split_merge_load_total(m);
    std::vector<Bound> out;
    if (!(load < 1.0)) {
        out.assign(m.classes.size(), invalid());
        return out;
    }
    double numerator = 0.0;
    for (const auto& c : m.classes) numerator += sm_second_moment_term(m, c);
    const double wait = numerator / (2.0 * (1.0 - load));
    for (const auto& c : m.classes) out.push_back(ok(h1(m, c) / c.rate + wait));
    return out;
}

std::vector<Bound> ub_npq(const QueueingModel& m) {
    double numerator = 0.0;
    for (const auto& c : m.classes) numerator += sm_second_moment_term(m, c);
    std::vector<Bound> out;
    for (std::size_t i = 0; i < m.classes.size(); ++i) {
        const double upto = split_merge_load(m, i);
        const double above = split_merge_load(m, i, true);
        if (!(upto < 1.0)) {
            out.push_back(invalid());
            continue;
        }
        const auto& c = m.classes[i];
        out.push_back(ok(h1(m, c) / c.rate + numerator / (2.0 * (1.0 - above) * (1.0 - upto))));
    }
    return out;
}

std::vector<Bound> ub_pq(const QueueingModel& m) {
    std::vector<Bound> out;
    for (std::size_t i = 0; i < m.classes.size(); ++i) {
        const auto& ci = m.classes[i];
        const double upto = split_merge_load(m, i);
        const double above = split_merge_load(m, i, true);
        if (!(upto < 1.0)) {
            out.push_back(invalid());
            continue;
        }
        double numerator = 0.0;
        for (const auto& c : m.classes)
            if (at_least_as_important(c, ci)) numerator += sm_second_moment_term(m, c);
        const double service = h1(m, ci) / (ci.rate * (1.0 - above));
        out.push_back(ok(service + numerator / (2.0 * (1.0 - above) * (1.0 - upto))));
    }
    return out;
}

std::vector<Bound> naive_lower(const QueueingModel& m) {
    std::vector<Bound> out;
    for (const auto& c : m.classes) {
        if (!((m.n - c.k + 1) * c.rate > c.lambda)) {
            out.push_back(unstable());
            continue;
        }
        double sum = 0.0;
        for (int j = 0; j < c.k; ++j) sum += 1.0 / ((m.n - j) * c.rate - c.lambda);
        out.push_back(ok(sum));
    }
    return out;
}

StageContext stage_context(const QueueingModel& m, std::size_t idx, int s) {
    const auto& ci = m.classes.at(idx);
    if (s < 1 || s > ci.k) throw std::out_of_range("stage outside 1..k_i");
    StageContext ctx;
    ctx.s = s;
    const double servers = m.n - s + 1;
    ctx.load.reserve(m.classes.size());
    for (std::size_t r = 0; r < m.classes.size(); ++r) {
        const auto& c = m.classes[r];
        ctx.load.push_back(c.lambda / (servers * c.rate));
        if (c.k < s) {
            ++ctx.finished_before;
            continue;
        }
        ctx.unfinished.push_back(r);
        if (c.priority_rank < ci.priority_rank) {
            ctx.higher_unfinished.push_back(r);
            ctx.residual -= ctx.load.back();
        }
    }
    return ctx;
}

namespace {

enum class StageKind { Fcfs, Npq, Pq };

Bound stage_sum(const QueueingModel& m, std::size_t i, StageKind kind, PqNumerator pq_num) {
    const auto& ci = m.classes[i];
    double total = 0.0;
    for (int s = 1; s <= ci.k; ++s) {
        const auto ctx = stage_context(m, i, s);
        const double ti = ctx.load[i];
        double unfinished_sq = 0.0, unfinished_load = 0.0;
        for (auto r : ctx.unfinished) {
            unfinished_sq += ctx.load[r] * ctx.load[r] / m.classes[r].lambda;
            unfinished_load += ctx.load[r];
        }
        switch (kind) {
            case StageKind::Fcfs: {
                const double denom = 1.0 - unfinished_load;
                if (!(denom > 0.0)) return invalid();
                total += ti / ci.lambda + unfinished_sq / denom;
                break;
            }
            case StageKind::Npq: {
                const double z = ctx.residual;
                if (!(z - ti > 0.0)) return invalid();
                total += ti / ci.lambda + unfinished_sq / (z * (z - ti));
                break;
            }
            case StageKind::Pq: {
                const double z = ctx.residual;
                if (!(z - ti > 0.0)) return invalid();
                double numerator = 0.0;
                if (pq_num == PqNumerator::SecondMoment) {
                    numerator = ti * ti / ci.lambda;
                    for (auto r : ctx.higher_unfinished) numerator += ctx.load[r] * ctx.load[r] / m.classes[r].lambda;
                } else {
                    numerator = 1.0 - z + ti / ((m.n - s + 1) * ci.rate);
                }
                total += ti / (ci.lambda * z) + numerator / (z * (z - ti));
                break;
            }
        }
    }
    return ok(total);
}

std::vector<Bound> all_classes(const QueueingModel& m, StageKind kind, PqNumerator pq_num = PqNumerator::SecondMoment) {
    std::vector<Bound> out;
    out.reserve(m.classes.size());
    for (std::size_t i = 0; i < m.classes.size(); ++i) out.push_back(stage_sum(m, i, kind, pq_num));
    return out;
}

}  // namespace

std::vector<Bound> lb_fcfs(const QueueingModel& m) { return all_classes(m, StageKind::Fcfs); }
std::vector<Bound> lb_npq(const QueueingModel& m) { return all_classes(m, StageKind::Npq); }
std::vector<Bound> lb_pq(const QueueingModel& m, PqNumerator numerator) {
    return all_classes(m, StageKind::Pq, numerator);
}

std::vector<Bound> lower_bound(const QueueingModel& m, Policy p) {
    switch (p) {
        case Policy::Fcfs: return lb_fcfs(m);
        case Policy::NonPreemptivePriority: return lb_npq(m);
        case Policy::PreemptivePriority: return lb_pq(m);
    }
    return {};
}

std::vector<Bound> upper_bound(const QueueingModel& m, Policy p) {
    switch (p) {
        case Policy::Fcfs: return ub_fcfs(m);
        case Policy::NonPreemptivePriority: return ub_npq(m);
        case Policy::PreemptivePriority: return ub_pq(m);
    }
    return {};
}

BoundReport bound_report(const ValidatedConfig& cfg) {
    const auto& sc = cfg.config();
    const auto m = QueueingModel::from(cfg);
    BoundReport rep;
    rep.policy = cfg.policy();
    rep.stable_fcfs = stability_fcfs(sc);
    rep.stable_priority = stability_priority(sc);
    rep.stable = cfg.policy() == Policy::Fcfs ? rep.stable_fcfs : rep.stable_priority;

    const auto naive = naive_lower(m);
    constexpr std::array policies{Policy::Fcfs, Policy::NonPreemptivePriority, Policy::PreemptivePriority};
    std::array<std::vector<Bound>, 3> lo, hi;
    for (auto p : policies) {
        const auto ix = static_cast<std::size_t>(p);
        lo[ix] = lower_bound(m, p);
        hi[ix] = upper_bound(m, p);
    }
    for (std::size_t i = 0; i < cfg.num_classes(); ++i) {
        ClassBounds cb{cfg.cls(i).id, naive[i], {}};
        for (auto p : policies) {
            const auto ix = static_cast<std::size_t>(p);
            const bool policy_stable = p == Policy::Fcfs ? rep.stable_fcfs : rep.stable_priority;
            cb.by_policy[ix] = policy_stable ? PolicyBounds{lo[ix][i], hi[ix][i]} : PolicyBounds{unstable(), unstable()};
        }
        if (!rep.stable) cb.naive = unstable();
        rep.classes.push_back(cb);
    }

    const bool partial_fork = std::any_of(sc.classes.begin(), sc.classes.end(),
                                          [&](const DataClass& c) { return c.r < sc.n; });
    if (partial_fork) rep.notes.emplace_back("bounds assume full fork (r = n); some classes use r < n");
    if (sc.power.w_l > 0.0) rep.notes.emplace_back("bounds ignore wake-up latency w_l");
    if (sc.service.kind != ServiceFamily::Kind::Exponential)
        rep.notes.emplace_back("bounds assume exponential service; configured family differs");
    if (sc.arrival.kind != ArrivalFamily::Kind::Poisson)
        rep.notes.emplace_back("bounds assume Poisson arrivals; configured family differs");
    return rep;
}

}  // namespace hetfj
