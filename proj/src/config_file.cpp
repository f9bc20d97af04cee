#include "hetfj/config_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

namespace hetfj {

ParseError::ParseError(std::string source, int line, std::string key, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + (key.empty() ? "" : ": " + key) + ": " + message),
      source_(std::move(source)),
      line_(line),
      key_(std::move(key)) {}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

double parse_plain(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty()) throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    return v;
}

long long parse_integer(std::string_view s) {
    s = trim(s);
    long long v = 0;
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || s.empty())
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    return v;
}

int parse_int(std::string_view s) {
    const auto v = parse_integer(s);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
        throw std::invalid_argument("integer out of range");
    return static_cast<int>(v);
}

bool parse_bool(std::string_view s) {
    s = trim(s);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument("not a boolean: '" + std::string(s) + "'");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t pos = 0;
    while (true) {
        const auto next = s.find(sep, pos);
        parts.push_back(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return parts;
}

DataClass& class_by_id(SystemConfig& cfg, int id) {
    for (auto& c : cfg.classes)
        if (c.id == id) return c;
    DataClass c;
    c.id = id;
    cfg.classes.push_back(c);
    return cfg.classes.back();
}

}  // namespace

double parse_number(std::string_view s) {
    s = trim(s);
    if (const auto slash = s.find('/'); slash != std::string_view::npos) {
        const double den = parse_plain(s.substr(slash + 1));
        if (den == 0.0) throw std::invalid_argument("division by zero in '" + std::string(s) + "'");
        return parse_plain(s.substr(0, slash)) / den;
    }
    return parse_plain(s);
}

std::vector<std::string> parse_value_list(std::string_view s) {
    s = trim(s);
    std::vector<std::string> out;
    if (const auto dots = s.find(".."); dots != std::string_view::npos) {
        const auto lo = parse_integer(s.substr(0, dots));
        const auto hi = parse_integer(s.substr(dots + 2));
        if (hi < lo) throw std::invalid_argument("empty range '" + std::string(s) + "'");
        for (auto v = lo; v <= hi; ++v) out.push_back(std::to_string(v));
        return out;
    }
    std::string token;
    for (char ch : s) {
        if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
            if (!token.empty()) out.push_back(std::move(token));
            token.clear();
        } else {
            token.push_back(ch);
        }
    }
    if (!token.empty()) out.push_back(std::move(token));
    if (out.empty()) throw std::invalid_argument("empty value list");
    return out;
}

void apply_setting(SystemConfig& cfg, std::string_view key, std::string_view raw) {
    const auto value = trim(raw);
    const auto parts = split(key, '.');

    if (parts.size() == 3 && parts[0] == "class") {
        DataClass& c = class_by_id(cfg, parse_int(parts[1]));
        const auto field = parts[2];
        if (field == "k") c.k = parse_int(value);
        else if (field == "l") c.l = parse_number(value);
        else if (field == "lambda") c.lambda = parse_number(value);
        else if (field == "r") c.r = parse_int(value);
        else if (field == "priority") c.priority_rank = parse_int(value);
        else throw std::invalid_argument("unknown class field '" + std::string(field) + "'");
        return;
    }

    if (key == "n") cfg.n = parse_int(value);
    else if (key == "mu") cfg.mu = parse_number(value);
    else if (key == "f") cfg.f = parse_number(value);
    else if (key == "policy") {
        const auto p = parse_policy(value);
        if (!p) throw std::invalid_argument("unknown policy '" + std::string(value) + "' (fcfs, npq, pq)");
        cfg.policy = *p;
    } else if (key == "service") {
        if (value == "exponential") cfg.service.kind = ServiceFamily::Kind::Exponential;
        else if (value == "pareto") cfg.service.kind = ServiceFamily::Kind::Pareto;
        else if (value == "deterministic") cfg.service.kind = ServiceFamily::Kind::Deterministic;
        else throw std::invalid_argument("unknown service family '" + std::string(value) + "'");
    } else if (key == "service.alpha") cfg.service.alpha = parse_number(value);
    else if (key == "arrival") {
        if (value == "poisson") cfg.arrival.kind = ArrivalFamily::Kind::Poisson;
        else if (value == "pareto") cfg.arrival.kind = ArrivalFamily::Kind::ParetoRenewal;
        else throw std::invalid_argument("unknown arrival family '" + std::string(value) + "'");
    } else if (key == "arrival.alpha") cfg.arrival.alpha = parse_number(value);
    else if (key == "power.c0") cfg.power.c0 = parse_number(value);
    else if (key == "power.p_a") cfg.power.p_a = parse_number(value);
    else if (key == "power.c_l") cfg.power.c_l = parse_number(value);
    else if (key == "power.p_l") cfg.power.p_l = parse_number(value);
    else if (key == "power.d_l") cfg.power.d_l = parse_number(value);
    else if (key == "power.w_l") cfg.power.w_l = parse_number(value);
    else if (key == "sim.jobs") cfg.sim.horizon_jobs = parse_integer(value);
    else if (key == "sim.warmup") cfg.sim.warmup_jobs = parse_integer(value);
    else if (key == "sim.replications") cfg.sim.replications = parse_int(value);
    else if (key == "sim.seed") {
        const auto v = parse_integer(value);
        if (v < 0) throw std::invalid_argument("seed must be nonnegative");
        cfg.sim.seed = static_cast<std::uint64_t>(v);
    } else if (key == "sim.allow_unstable") cfg.sim.allow_unstable = parse_bool(value);
    else if (key == "sim.split_merge") cfg.sim.split_merge = parse_bool(value);
    else throw std::invalid_argument("unknown key '" + std::string(key) + "'");
}

Scenario parse_scenario(std::string_view text, const std::string& source) {
    Scenario sc;
    sc.base.classes.clear();
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(source, line_no, "", "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ParseError(source, line_no, "", "missing key");
        if (value.empty()) throw ParseError(source, line_no, key, "missing value");

        try {
            if (key == "scenario.name") sc.name = std::string(value);
            else if (key == "sweep.param") (sc.sweep ? *sc.sweep : sc.sweep.emplace()).param = std::string(value);
            else if (key == "sweep.values") (sc.sweep ? *sc.sweep : sc.sweep.emplace()).values = parse_value_list(value);
            else if (key == "series.param") (sc.series ? *sc.series : sc.series.emplace()).param = std::string(value);
            else if (key == "series.values") (sc.series ? *sc.series : sc.series.emplace()).values = parse_value_list(value);
            else apply_setting(sc.base, key, value);
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, key, e.what());
        }
    }

    for (const auto* axis : {&sc.sweep, &sc.series}) {
        if (!*axis) continue;
        if ((*axis)->param.empty() || (*axis)->values.empty())
            throw ParseError(source, line_no, axis == &sc.sweep ? "sweep" : "series", "needs both .param and .values");
        SystemConfig probe = sc.base;
        try {
            apply_setting(probe, (*axis)->param, (*axis)->values.front());
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, (*axis)->param, e.what());
        }
    }
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto text = ss.str();
    auto sc = parse_scenario(text, path.string());
    if (text.find("scenario.name") == std::string::npos) sc.name = path.stem().string();
    return sc;
}

std::string short_param_name(std::string_view param) {
    const auto parts = split(param, '.');
    if (parts.size() == 3 && parts[0] == "class") return std::string(parts[2]) + std::string(parts[1]);
    std::string out(param);
    std::replace(out.begin(), out.end(), '.', '_');
    return out;
}

std::string value_tag(std::string_view value) {
    std::string out;
    for (char ch : value) {
        if (ch == '/') out += "over";
        else if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '-') out.push_back(ch);
        else out.push_back('_');
    }
    return out;
}

}  // namespace hetfj
