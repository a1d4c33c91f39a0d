#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hysrl {

/// Bad configuration: syntax, unknown key, wrong type or out-of-range value.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TomlValue;
using TomlArray = std::vector<TomlValue>;

struct TomlValue {
    std::variant<bool, std::int64_t, double, std::string, TomlArray> data;
    int line = 0;

    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(data); }
    bool is_number() const { return is_int() || std::holds_alternative<double>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_array() const { return std::holds_alternative<TomlArray>(data); }
};

/// Key/value pairs of one [table]; the root table is named "".
using TomlTable = std::map<std::string, TomlValue>;
using TomlDocument = std::map<std::string, TomlTable>;

/**
Reads the TOML subset used by experiment files: [table] headers (dotted
names kept verbatim), bare keys, basic strings, integers, floats, booleans,
and possibly multi-line arrays of those. Inline tables, dates and literal
strings are rejected.
*/
TomlDocument parse_toml(std::string_view text);

/// Typed access with key tracking, so leftover keys can be reported.
class ConfigSection {
public:
    ConfigSection(std::string name, const TomlTable* table);

    bool has(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback);
    std::int64_t get_int(const std::string& key, std::int64_t fallback);
    double get_double(const std::string& key, double fallback);
    std::string get_string(const std::string& key, const std::string& fallback);
    std::vector<std::int64_t> get_int_array(const std::string& key, std::vector<std::int64_t> fallback);
    std::vector<double> get_double_array(const std::string& key, std::vector<double> fallback);
    std::vector<std::string> get_string_array(const std::string& key, std::vector<std::string> fallback);

    /// Throws ConfigError naming the first key never read.
    void reject_unused() const;

private:
    const TomlValue* find(const std::string& key);
    [[noreturn]] void type_error(const std::string& key, const char* expected) const;

    std::string name_;
    const TomlTable* table_;
    std::vector<std::string> used_;
};

}  // namespace hysrl
