#include "hetfj/commands.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include "hetfj/bounds.hpp"
#include "hetfj/report.hpp"

namespace hetfj {

namespace fs = std::filesystem;

namespace {

std::string fmt_num(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string bound_text(const Bound& b) { return b.valid() ? fmt_num(b.value) : std::string(to_string(b.status)); }

std::string pad(std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
}

std::string point_label(const Scenario& sc, const SweepPoint& p) {
    std::string s;
    if (sc.sweep) s += short_param_name(sc.sweep->param) + "=" + p.sweep_value;
    if (sc.series) s += (s.empty() ? "" : " ") + short_param_name(sc.series->param) + "=" + p.series_value;
    return s;
}

std::optional<Scenario> load(const fs::path& config, std::ostream& err) {
    try {
        return load_scenario(config);
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
    }
    return std::nullopt;
}

std::optional<std::vector<SweepPoint>> expand_checked(const Scenario& sc, const RunOverrides& ov, std::ostream& err) {
    try {
        return expand(sc, ov);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
    }
    return std::nullopt;
}

}  // namespace

int cmd_bounds(const fs::path& config, const RunOverrides& ov, const std::optional<fs::path>& out_dir, CommandIo io) {
    const auto sc = load(config, io.err);
    if (!sc) return kExitUsage;
    const auto points = expand_checked(*sc, ov, io.err);
    if (!points) return kExitUsage;

    std::vector<ValidatedConfig> validated;
    bool invalid = false;
    for (const auto& p : *points) {
        SystemConfig cfg = p.cfg;
        cfg.sim.allow_unstable = true;
        auto v = validate(cfg);
        if (auto* errs = std::get_if<std::vector<ConfigError>>(&v)) {
            io.err << "invalid configuration" << (sc->sweep || sc->series ? " at " + point_label(*sc, p) : "") << ":\n"
                   << format_errors(*errs) << '\n';
            invalid = true;
            continue;
        }
        validated.push_back(std::get<ValidatedConfig>(std::move(v)));
    }
    if (invalid) return kExitInvalid;

    const Policy policies[] = {Policy::Fcfs, Policy::NonPreemptivePriority, Policy::PreemptivePriority};
    std::ofstream csv;
    if (out_dir) {
        fs::create_directories(*out_dir);
        csv.open(*out_dir / (sc->name + "_bounds.csv"));
        csv << "scenario,series_value,sweep_value,class_id,policy,stable,naive_lb,lb,ub\n";
    }

    for (std::size_t i = 0; i < validated.size(); ++i) {
        const auto& cfg = validated[i];
        const auto rep = bound_report(cfg);
        const auto& point = (*points)[i];
        if (sc->sweep || sc->series) io.out << "== " << point_label(*sc, point) << '\n';
        io.out << "stability: fcfs " << (rep.stable_fcfs ? "stable" : "unstable") << ", priority "
               << (rep.stable_priority ? "stable" : "unstable") << '\n';
        io.out << "verdict (" << to_string(rep.policy) << "): " << (rep.stable ? "STABLE" : "UNSTABLE") << '\n';
        io.out << pad("class", 7) << pad("policy", 8) << pad("naive_lb", 14) << pad("lb", 14) << "ub\n";
        for (const auto& cb : rep.classes) {
            for (Policy p : policies) {
                const bool stable = p == Policy::Fcfs ? rep.stable_fcfs : rep.stable_priority;
                io.out << pad(std::to_string(cb.class_id), 7) << pad(std::string(to_string(p)), 8)
                       << pad(bound_text(cb.naive), 14) << pad(bound_text(cb[p].lower), 14) << bound_text(cb[p].upper)
                       << '\n';
                if (csv.is_open())
                    csv << sc->name << ',' << point.series_value << ',' << point.sweep_value << ',' << cb.class_id
                        << ',' << to_string(p) << ',' << (stable ? 1 : 0) << ',' << bound_text(cb.naive) << ','
                        << bound_text(cb[p].lower) << ',' << bound_text(cb[p].upper) << '\n';
            }
        }
        for (const auto& note : rep.notes) io.out << "note: " << note << '\n';
    }
    return kExitOk;
}

int cmd_run(const RunRequest& req, CommandIo io) {
    const auto sc = load(req.config, io.err);
    if (!sc) return kExitUsage;
    if (!expand_checked(*sc, req.overrides, io.err)) return kExitUsage;

    if (req.trace) {
        const auto points = expand(*sc, req.overrides);
        auto v = validate(points.front().cfg);
        if (auto* errs = std::get_if<std::vector<ConfigError>>(&v)) {
            io.err << "cannot trace first point:\n" << format_errors(*errs) << '\n';
            return kExitInvalid;
        }
        try {
            const auto trace = run(std::get<ValidatedConfig>(v));
            if (req.trace->has_parent_path()) fs::create_directories(req.trace->parent_path());
            std::ofstream os(*req.trace);
            write_trace(os, trace);
        } catch (const DivergenceError& e) {
            io.err << "trace run diverged: " << e.what() << '\n';
        }
    }

    const auto results = run_scenario(*sc, req.overrides, req.workers);

    fs::create_directories(req.out_dir);
    const auto csv_path = req.out_dir / (sc->name + ".csv");
    std::ofstream csv(csv_path, std::ios::binary);
    write_csv(csv, *sc, results);
    csv.close();
    if (!csv) {
        io.err << "error: failed writing " << csv_path.string() << '\n';
        return kExitUsage;
    }

    int failed = 0;
    for (const auto& r : results) {
        const std::string label = sc->sweep || sc->series ? point_label(*sc, r.point) + ": " : "";
        if (r.status != PointStatus::Ok) {
            ++failed;
            io.err << label << to_string(r.status) << ": " << r.message << '\n';
            continue;
        }
        io.out << label;
        for (const auto& cm : r.result.classes)
            io.out << "class " << cm.class_id << " mean " << fmt_num(cm.mean_latency) << " +- "
                   << fmt_num(cm.ci95_half_width, "%.3g") << "  ";
        io.out << "efficiency " << fmt_num(r.result.efficiency) << " bits/J\n";
    }
    io.out << "wrote " << csv_path.string() << " (" << results.size() - static_cast<std::size_t>(failed) << "/"
           << results.size() << " points ok)\n";
    return failed ? kExitPointFailed : kExitOk;
}

int cmd_sweep_report(const fs::path& csv_dir, const fs::path& out_dir, CommandIo io) {
    try {
        const auto rep = sweep_report(csv_dir, out_dir);
        for (const auto& w : rep.warnings) io.err << "warning: " << w << '\n';
        for (const auto& f : rep.files) io.out << (out_dir / f).string() << '\n';
    } catch (const ReportError& e) {
        io.err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitOk;
}

}  // namespace hetfj
