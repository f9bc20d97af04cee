#include "hetfj/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include "hetfj/config_file.hpp"

namespace hetfj {

namespace fs = std::filesystem;

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    out.push_back(std::move(field));
    return out;
}

namespace {

const std::vector<std::string> kRequired{"scenario",    "sweep_param", "sweep_value", "class_id",
                                         "mean_latency", "ci95",       "efficiency_bits_per_J", "seed"};

struct Row {
    std::string scenario, seed, series_param, series_value, sweep_param, sweep_value;
    int class_id;
    std::string mean, ci, eff, eff_ci;
};

std::vector<Row> read_rows(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw ReportError("cannot read " + file.string());
    std::string line;
    if (!std::getline(in, line)) return {};
    const auto header = split_csv_line(line);
    auto col = [&header](const std::string& name) -> int {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };
    std::vector<std::string> missing;
    for (const auto& name : kRequired)
        if (col(name) < 0) missing.push_back(name);
    if (!missing.empty()) {
        std::string msg = file.filename().string() + ": missing column";
        msg += missing.size() > 1 ? "s " : " ";
        for (std::size_t i = 0; i < missing.size(); ++i) msg += (i ? ", '" : "'") + missing[i] + "'";
        throw ReportError(msg);
    }
    const int status = col("status");
    const int series_param = col("series_param");
    const int series_value = col("series_value");
    const int eff_ci = col("efficiency_ci95");

    std::vector<Row> rows;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != header.size())
            throw ReportError(file.filename().string() + ":" + std::to_string(line_no) + ": expected " +
                              std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
        auto get = [&f](int c) { return c < 0 ? std::string() : f[static_cast<std::size_t>(c)]; };
        if (status >= 0 && get(status) != "ok") continue;
        Row r;
        r.scenario = get(col("scenario"));
        r.seed = get(col("seed"));
        r.series_param = get(series_param);
        r.series_value = get(series_value);
        r.sweep_param = get(col("sweep_param"));
        r.sweep_value = get(col("sweep_value"));
        try {
            r.class_id = std::stoi(get(col("class_id")));
        } catch (const std::exception&) {
            throw ReportError(file.filename().string() + ":" + std::to_string(line_no) + ": bad class_id");
        }
        r.mean = get(col("mean_latency"));
        r.ci = get(col("ci95"));
        r.eff = get(col("efficiency_bits_per_J"));
        r.eff_ci = eff_ci >= 0 ? get(eff_ci) : "nan";
        if (r.ci.empty()) r.ci = "nan";
        if (r.eff_ci.empty()) r.eff_ci = "nan";
        rows.push_back(std::move(r));
    }
    return rows;
}

// Values in first-seen order.
template <class T>
void add_unique(std::vector<T>& v, const T& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace

ReportOutput sweep_report(const fs::path& csv_dir, const fs::path& out_dir) {
    if (!fs::is_directory(csv_dir)) throw ReportError("not a directory: " + csv_dir.string());
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(csv_dir))
        if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
    std::sort(files.begin(), files.end());

    std::vector<Row> rows;
    for (const auto& f : files) {
        auto more = read_rows(f);
        rows.insert(rows.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
    if (rows.empty()) throw ReportError("no input rows in " + csv_dir.string());

    ReportOutput out;
    std::vector<std::string> scenarios;
    std::map<std::string, std::vector<std::string>> seeds;
    for (const auto& r : rows) {
        add_unique(scenarios, r.scenario);
        add_unique(seeds[r.scenario], r.seed);
    }

    std::ofstream index;
    fs::create_directories(out_dir);
    index.open(out_dir / "index.tsv");
    index << "file\tscenario\tseed\tseries\tcolumns\n";

    for (const auto& sc : scenarios) {
        const auto& sc_seeds = seeds[sc];
        if (sc_seeds.size() > 1) {
            std::string w = "scenario '" + sc + "' has rows from " + std::to_string(sc_seeds.size()) +
                            " seeds; grouping by seed";
            out.warnings.push_back(w);
        }
        for (const auto& seed : sc_seeds) {
            const std::string group = sc_seeds.size() > 1 ? sc + "_seed" + seed : sc;
            std::vector<const Row*> g;
            for (const auto& r : rows)
                if (r.scenario == sc && r.seed == seed) g.push_back(&r);

            std::vector<std::string> series_values;
            std::vector<int> class_ids;
            for (const auto* r : g) {
                add_unique(series_values, r->series_value);
                add_unique(class_ids, r->class_id);
            }
            std::sort(class_ids.begin(), class_ids.end());
            const auto& sweep_param = g.front()->sweep_param;
            const auto& series_param = g.front()->series_param;
            const std::string x_name = sweep_param.empty() ? "point" : short_param_name(sweep_param);
            fs::create_directories(out_dir / group);

            for (const auto& sv : series_values) {
                std::string suffix = x_name;
                if (!series_param.empty()) suffix += "_" + short_param_name(series_param) + value_tag(sv);
                const fs::path lat_rel = fs::path(group) / ("latency_vs_" + suffix + ".dat");
                const fs::path eff_rel = fs::path(group) / ("efficiency_vs_" + suffix + ".dat");

                std::vector<std::string> xs;
                std::map<std::pair<std::string, int>, const Row*> cell;
                for (const auto* r : g) {
                    if (r->series_value != sv) continue;
                    const std::string x = sweep_param.empty() ? "1" : r->sweep_value;
                    add_unique(xs, x);
                    cell[{x, r->class_id}] = r;
                }

                std::ofstream lat(out_dir / lat_rel);
                std::string lat_cols = x_name;
                for (int id : class_ids)
                    lat_cols += " mean_class" + std::to_string(id) + " ci95_class" + std::to_string(id);
                lat << "# " << lat_cols << '\n';
                std::ofstream eff(out_dir / eff_rel);
                const std::string eff_cols = x_name + " efficiency_bits_per_J ci95";
                eff << "# " << eff_cols << '\n';
                for (const auto& x : xs) {
                    lat << x;
                    const Row* any = nullptr;
                    for (int id : class_ids) {
                        const auto it = cell.find({x, id});
                        if (it == cell.end()) {
                            lat << " nan nan";
                        } else {
                            lat << ' ' << it->second->mean << ' ' << it->second->ci;
                            any = it->second;
                        }
                    }
                    lat << '\n';
                    if (any) eff << x << ' ' << any->eff << ' ' << any->eff_ci << '\n';
                }
                if (!lat || !eff) throw ReportError("failed writing under " + (out_dir / group).string());

                const std::string series = series_param.empty() ? "" : series_param + "=" + sv;
                index << lat_rel.generic_string() << '\t' << sc << '\t' << seed << '\t' << series << '\t' << lat_cols << '\n';
                index << eff_rel.generic_string() << '\t' << sc << '\t' << seed << '\t' << series << '\t' << eff_cols << '\n';
                out.files.push_back(lat_rel);
                out.files.push_back(eff_rel);
            }
        }
    }
    out.files.push_back("index.tsv");
    return out;
}

}  // namespace hetfj
