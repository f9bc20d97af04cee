#include "hetfj/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <ostream>
#include <thread>

#include "hetfj/bounds.hpp"

namespace hetfj {

std::string_view to_string(PointStatus s) {
    switch (s) {
        case PointStatus::Ok: return "ok";
        case PointStatus::Invalid: return "invalid";
        case PointStatus::Unstable: return "unstable";
        case PointStatus::Diverged: return "diverged";
    }
    return "?";
}

std::vector<SweepPoint> expand(const Scenario& sc, const RunOverrides& ov) {
    auto adjust = [&ov](SystemConfig cfg) {
        for (const auto& [k, v] : ov.settings) apply_setting(cfg, k, v);
        if (ov.seed) cfg.sim.seed = *ov.seed;
        if (ov.jobs) {
            cfg.sim.horizon_jobs = *ov.jobs;
            cfg.sim.warmup_jobs = -1;
        }
        if (ov.replications) cfg.sim.replications = *ov.replications;
        if (ov.policy) cfg.policy = *ov.policy;
        if (ov.allow_unstable) cfg.sim.allow_unstable = true;
        if (ov.split_merge) cfg.sim.split_merge = true;
        return cfg;
    };

    const std::vector<std::string> none{""};
    const auto& series_values = sc.series ? sc.series->values : none;
    const auto& sweep_values = sc.sweep ? sc.sweep->values : none;
    std::vector<SweepPoint> out;
    for (const auto& sv : series_values) {
        for (const auto& xv : sweep_values) {
            SystemConfig cfg = sc.base;
            if (sc.series) apply_setting(cfg, sc.series->param, sv);
            if (sc.sweep) apply_setting(cfg, sc.sweep->param, xv);
            out.push_back({sv, xv, adjust(std::move(cfg))});
        }
    }
    return out;
}

namespace {

// Runs task(i) for i in [0, count) on up to `workers` threads.
template <class Fn>
void parallel_for(std::size_t count, int workers, Fn&& task) {
    const auto threads = static_cast<std::size_t>(std::clamp(workers, 1, 256));
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, count); ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) task(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace

std::vector<RawTrace> run_replications(const ValidatedConfig& cfg, int workers, const EngineOptions& base) {
    const auto reps = static_cast<std::size_t>(cfg.config().sim.replications);
    std::vector<RawTrace> traces(reps);
    std::vector<std::exception_ptr> errors(reps);
    parallel_for(reps, workers, [&](std::size_t r) {
        try {
            EngineOptions opts = base;
            opts.replication = r;
            traces[r] = run(cfg, opts);
        } catch (...) {
            errors[r] = std::current_exception();
        }
    });
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return traces;
}

std::vector<PointResult> run_scenario(const Scenario& sc, const RunOverrides& ov, int workers) {
    auto points = expand(sc, ov);
    std::vector<PointResult> results(points.size());

    struct Task {
        std::size_t point;
        std::size_t rep;
    };
    std::vector<Task> tasks;
    std::vector<std::vector<ReplicationSummary>> summaries(points.size());
    std::vector<std::vector<std::string>> failures(points.size());

    for (std::size_t p = 0; p < points.size(); ++p) {
        auto& res = results[p];
        res.point = points[p];
        auto v = validate(points[p].cfg);
        if (auto* errs = std::get_if<std::vector<ConfigError>>(&v)) {
            const bool unstable = std::all_of(errs->begin(), errs->end(), [](const ConfigError& e) {
                return e.kind == ConfigError::Kind::Unstable;
            });
            res.status = unstable ? PointStatus::Unstable : PointStatus::Invalid;
            res.message = format_errors(*errs);
            continue;
        }
        res.cfg = std::get<ValidatedConfig>(std::move(v));
        const auto reps = static_cast<std::size_t>(res.cfg->config().sim.replications);
        summaries[p].resize(reps);
        failures[p].resize(reps);
        for (std::size_t r = 0; r < reps; ++r) tasks.push_back({p, r});
    }

    parallel_for(tasks.size(), workers, [&](std::size_t t) {
        const auto [p, r] = tasks[t];
        const auto& cfg = *results[p].cfg;
        try {
            EngineOptions opts;
            opts.replication = r;
            summaries[p][r] = reduce(run(cfg, opts), cfg);
        } catch (const DivergenceError& e) {
            failures[p][r] = std::string("diverged: ") + e.what();
        } catch (const std::exception& e) {
            failures[p][r] = std::string("failed: ") + e.what();
        }
    });

    for (std::size_t p = 0; p < points.size(); ++p) {
        auto& res = results[p];
        if (!res.cfg) continue;
        const auto bad = std::find_if(failures[p].begin(), failures[p].end(), [](const auto& s) { return !s.empty(); });
        if (bad != failures[p].end()) {
            res.status = PointStatus::Diverged;
            res.message = "replication " + std::to_string(bad - failures[p].begin()) + " " + *bad;
            continue;
        }
        res.result = summarize(std::span<const ReplicationSummary>(summaries[p]), *res.cfg);
        res.result.bounds = bound_report(*res.cfg);
        summaries[p].clear();
    }
    return results;
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "schema_version", "scenario",      "series_param",  "series_value", "sweep_param", "sweep_value",
        "class_id",       "policy",        "mean_latency",  "ci95",         "p50",         "p95",
        "p99",            "completed",     "efficiency_bits_per_J",         "t_a",         "t_l",
        "energy_J",       "lb",            "ub",            "naive_lb",     "seed",        "efficiency_ci95",
        "std_error",      "throughput",    "storage_kb",    "status"};
    return cols;
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string bound_cell(const Bound& b) { return b.valid() ? num(b.value) : std::string(to_string(b.status)); }

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

void write_csv(std::ostream& os, const Scenario& sc, const std::vector<PointResult>& results) {
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';

    const std::string series_param = sc.series ? sc.series->param : "";
    const std::string sweep_param = sc.sweep ? sc.sweep->param : "";
    for (const auto& res : results) {
        const auto& cfg = res.point.cfg;
        for (std::size_t i = 0; i < cfg.classes.size(); ++i) {
            std::vector<std::string> row{std::to_string(kCsvSchemaVersion),
                                         csv_escape(sc.name),
                                         csv_escape(series_param),
                                         csv_escape(res.point.series_value),
                                         csv_escape(sweep_param),
                                         csv_escape(res.point.sweep_value),
                                         std::to_string(cfg.classes[i].id),
                                         std::string(to_string(cfg.policy))};
            if (res.status == PointStatus::Ok) {
                const auto& cm = res.result.classes[i];
                const auto& r = res.result;
                const auto& cb = r.bounds->classes[i];
                row.insert(row.end(), {num(cm.mean_latency), num(cm.ci95_half_width), num(cm.p50), num(cm.p95),
                                       num(cm.p99), std::to_string(cm.completed), num(r.efficiency),
                                       num(r.t_active), num(r.t_low), num(r.energy_j),
                                       bound_cell(cb[cfg.policy].lower), bound_cell(cb[cfg.policy].upper),
                                       bound_cell(cb.naive), std::to_string(cfg.sim.seed), num(r.efficiency_ci95),
                                       num(cm.std_error), num(cm.throughput), num(r.storage_per_file[i]), "ok"});
            } else {
                for (int k = 0; k < 13; ++k) row.emplace_back("");
                row.push_back(std::to_string(cfg.sim.seed));
                for (int k = 0; k < 4; ++k) row.emplace_back("");
                row.push_back(csv_escape(std::string(to_string(res.status)) + ": " + res.message));
            }
            for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
            os << '\n';
        }
    }
}

}  // namespace hetfj
