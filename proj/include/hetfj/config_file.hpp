#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hetfj/model.hpp"

namespace hetfj {

/// Configuration text error with its location.
class ParseError : public std::runtime_error {
public:
    ParseError(std::string source, int line, std::string key, const std::string& message);
    const std::string& source() const { return source_; }
    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    std::string source_;
    int line_;
    std::string key_;
};

struct SweepAxis {
    std::string param;                // a settable key, e.g. "class.2.k"
    std::vector<std::string> values;  // raw tokens, applied in order
};

struct Scenario {
    std::string name = "scenario";
    SystemConfig base;
    std::optional<SweepAxis> sweep;   // x axis
    std::optional<SweepAxis> series;  // one curve per value
};

/// Parses a `key = value` configuration. Lines starting with '#' are comments;
/// a trailing `# ...` after a value is ignored as well.
Scenario parse_scenario(std::string_view text, const std::string& source = "<string>");
Scenario load_scenario(const std::filesystem::path& path);

/// Sets one scalar of the configuration by its key. Throws std::invalid_argument
/// for unknown keys or malformed values.
void apply_setting(SystemConfig& cfg, std::string_view key, std::string_view value);

/// Number with optional fraction syntax: "0.25", "1/6", "1e-3".
double parse_number(std::string_view s);

/// Expands "1..10" (inclusive integer range) or a comma/space separated list.
std::vector<std::string> parse_value_list(std::string_view s);

/// Compact axis label for file names: "class.2.k" -> "k2", "mu" -> "mu".
std::string short_param_name(std::string_view param);

/// File-name safe rendering of a value token: "1/6" -> "1over6".
std::string value_tag(std::string_view value);

}  // namespace hetfj
