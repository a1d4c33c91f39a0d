#include "hysrl/toml_config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace hysrl {

namespace {

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    TomlDocument run() {
        TomlDocument doc;
        doc[""];
        std::string current;
        while (true) {
            skip_blank_lines();
            if (eof()) break;
            if (peek() == '[') {
                current = table_header();
                if (doc.count(current) && !doc[current].empty())
                    fail("table [" + current + "] defined twice");
                doc[current];
            } else {
                const int key_line = line_;
                std::string key = bare_key();
                skip_spaces();
                expect('=');
                skip_spaces();
                TomlValue v = value();
                v.line = key_line;
                auto& table = doc[current];
                if (table.count(key)) fail("duplicate key '" + key + "'");
                table.emplace(std::move(key), std::move(v));
            }
            end_of_line();
        }
        return doc;
    }

private:
    bool eof() const { return pos_ >= text_.size(); }
    char peek() const { return eof() ? '\0' : text_[pos_]; }
    char take() {
        const char c = text_[pos_++];
        if (c == '\n') ++line_;
        return c;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
    }

    void skip_spaces() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }
    void skip_comment() {
        if (peek() == '#')
            while (!eof() && peek() != '\n') ++pos_;
    }
    void skip_blank_lines() {
        while (!eof()) {
            skip_spaces();
            skip_comment();
            if (peek() == '\r') ++pos_;
            if (peek() == '\n') {
                take();
                continue;
            }
            break;
        }
    }
    // whitespace, comments and newlines inside arrays
    void skip_array_filler() {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                take();
            } else if (c == '#') {
                skip_comment();
            } else {
                break;
            }
        }
    }
    void end_of_line() {
        skip_spaces();
        skip_comment();
        if (peek() == '\r') ++pos_;
        if (eof()) return;
        if (peek() != '\n') fail(std::string("unexpected character '") + peek() + "'");
        take();
    }
    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        take();
    }

    static bool key_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    std::string bare_key() {
        const std::size_t start = pos_;
        while (!eof() && key_char(peek())) ++pos_;
        if (pos_ == start) fail("expected a key");
        return std::string(text_.substr(start, pos_ - start));
    }

    std::string table_header() {
        expect('[');
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_spaces();
        const std::size_t start = pos_;
        while (!eof() && (key_char(peek()) || peek() == '.')) ++pos_;
        if (pos_ == start) fail("empty table name");
        std::string name(text_.substr(start, pos_ - start));
        skip_spaces();
        expect(']');
        return name;
    }

    TomlValue value() {
        const char c = peek();
        if (c == '"') return {basic_string(), line_};
        if (c == '[') return {array(), line_};
        if (c == '\'') fail("literal strings are not supported");
        if (c == '{') fail("inline tables are not supported");
        return scalar();
    }

    std::string basic_string() {
        expect('"');
        std::string out;
        while (true) {
            if (eof() || peek() == '\n') fail("unterminated string");
            const char c = take();
            if (c == '"') break;
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (eof()) fail("unterminated escape");
            switch (take()) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                default: fail("unsupported escape sequence");
            }
        }
        return out;
    }

    TomlArray array() {
        expect('[');
        TomlArray out;
        while (true) {
            skip_array_filler();
            if (peek() == ']') {
                take();
                return out;
            }
            TomlValue v = value();
            v.line = line_;
            out.push_back(std::move(v));
            skip_array_filler();
            if (peek() == ',') {
                take();
                continue;
            }
            if (peek() == ']') {
                take();
                return out;
            }
            fail("expected ',' or ']' in array");
        }
    }

    TomlValue scalar() {
        const std::size_t start = pos_;
        while (!eof()) {
            const char c = peek();
            if (c == ',' || c == ']' || c == '#' || c == ' ' || c == '\t' || c == '\r' || c == '\n') break;
            ++pos_;
        }
        std::string tok(text_.substr(start, pos_ - start));
        if (tok.empty()) fail("expected a value");
        if (tok == "true") return {true, line_};
        if (tok == "false") return {false, line_};
        tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
        const bool floating = tok.find_first_of(".eE") != std::string::npos || tok == "inf" || tok == "+inf" ||
                              tok == "-inf" || tok == "nan";
        const char* first = tok.data();
        const char* last = tok.data() + tok.size();
        if (*first == '+') ++first;
        if (floating) {
            double d = 0.0;
            auto [ptr, ec] = std::from_chars(first, last, d);
            if (ec != std::errc() || ptr != last) fail("invalid number '" + tok + "'");
            return {d, line_};
        }
        std::int64_t i = 0;
        auto [ptr, ec] = std::from_chars(first, last, i);
        if (ec != std::errc() || ptr != last) fail("invalid value '" + tok + "'");
        return {i, line_};
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    int line_ = 1;
};

}  // namespace

TomlDocument parse_toml(std::string_view text) {
    return Parser(text).run();
}

ConfigSection::ConfigSection(std::string name, const TomlTable* table) : name_(std::move(name)), table_(table) {}

bool ConfigSection::has(const std::string& key) const {
    return table_ && table_->count(key) > 0;
}

const TomlValue* ConfigSection::find(const std::string& key) {
    if (!table_) return nullptr;
    auto it = table_->find(key);
    if (it == table_->end()) return nullptr;
    used_.push_back(key);
    return &it->second;
}

void ConfigSection::type_error(const std::string& key, const char* expected) const {
    const std::string where = name_.empty() ? key : name_ + "." + key;
    throw ConfigError("config: '" + where + "' must be " + expected);
}

bool ConfigSection::get_bool(const std::string& key, bool fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_bool()) type_error(key, "a boolean");
    return std::get<bool>(v->data);
}

std::int64_t ConfigSection::get_int(const std::string& key, std::int64_t fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->is_int()) return std::get<std::int64_t>(v->data);
    // 2e5 style literals are accepted when integral
    if (std::holds_alternative<double>(v->data)) {
        const double d = std::get<double>(v->data);
        if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
    }
    type_error(key, "an integer");
}

double ConfigSection::get_double(const std::string& key, double fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->is_int()) return static_cast<double>(std::get<std::int64_t>(v->data));
    if (!v->is_number()) type_error(key, "a number");
    return std::get<double>(v->data);
}

std::string ConfigSection::get_string(const std::string& key, const std::string& fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_string()) type_error(key, "a string");
    return std::get<std::string>(v->data);
}

std::vector<std::int64_t> ConfigSection::get_int_array(const std::string& key, std::vector<std::int64_t> fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) type_error(key, "an array of integers");
    std::vector<std::int64_t> out;
    for (const auto& e : std::get<TomlArray>(v->data)) {
        if (!e.is_int()) type_error(key, "an array of integers");
        out.push_back(std::get<std::int64_t>(e.data));
    }
    return out;
}

std::vector<double> ConfigSection::get_double_array(const std::string& key, std::vector<double> fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (!v->is_array()) type_error(key, "an array of numbers");
    std::vector<double> out;
    for (const auto& e : std::get<TomlArray>(v->data)) {
        if (e.is_int()) {
            out.push_back(static_cast<double>(std::get<std::int64_t>(e.data)));
        } else if (e.is_number()) {
            out.push_back(std::get<double>(e.data));
        } else {
            type_error(key, "an array of numbers");
        }
    }
    return out;
}

std::vector<std::string> ConfigSection::get_string_array(const std::string& key,
                                                         std::vector<std::string> fallback) {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->is_string()) return {std::get<std::string>(v->data)};
    if (!v->is_array()) type_error(key, "an array of strings");
    std::vector<std::string> out;
    for (const auto& e : std::get<TomlArray>(v->data)) {
        if (!e.is_string()) type_error(key, "an array of strings");
        out.push_back(std::get<std::string>(e.data));
    }
    return out;
}

void ConfigSection::reject_unused() const {
    if (!table_) return;
    for (const auto& [key, v] : *table_)
        if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
            const std::string where = name_.empty() ? key : "[" + name_ + "] " + key;
            throw ConfigError("config line " + std::to_string(v.line) + ": unknown key " + where);
        }
}

}  // namespace hysrl
