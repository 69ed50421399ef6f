#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vcr/cli.hpp"
#include "vcr/errors.hpp"

namespace vcr::cli {

namespace {

struct KeyInfo {
    std::string_view key;
    ValueType type;
};

constexpr KeyInfo kRegistry[] = {
    {"n", ValueType::IntList},
    {"lambda_z", ValueType::DoubleList},
    {"lambda_u", ValueType::DoubleList},
    {"alpha", ValueType::DoubleList},
    {"recruitment_dist", ValueType::String},
    {"trials", ValueType::Int},
    {"reps", ValueType::Int},
    {"seed", ValueType::Int},
    {"threads", ValueType::Int},
    {"max_time", ValueType::Double},
    {"trace", ValueType::String},
    {"trace_trials", ValueType::Int},
    {"solver", ValueType::String},
    {"per_state", ValueType::Bool},
    {"mc_trials", ValueType::Int},
    {"samples", ValueType::Int},
    {"significance", ValueType::Double},
    {"strategy", ValueType::StringList},
    {"horizon", ValueType::Double},
    {"lambda_ve", ValueType::Double},
    {"lambda_app", ValueType::Double},
    {"lambda_d", ValueType::Double},
    {"l_a", ValueType::Double},
    {"h_a", ValueType::Double},
    {"l_v", ValueType::Double},
    {"h_v", ValueType::Double},
    {"max_groups", ValueType::Int},
    {"preset", ValueType::String},
    {"mode", ValueType::String},
    {"out", ValueType::String},
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string_view type_name(ValueType t) {
    switch (t) {
        case ValueType::Int: return "an integer";
        case ValueType::Double: return "a number";
        case ValueType::String: return "a string";
        case ValueType::Bool: return "a boolean";
        case ValueType::IntList: return "a list of integers";
        case ValueType::DoubleList: return "a list of numbers";
        case ValueType::StringList: return "a list of strings";
    }
    return "?";
}

std::optional<double> to_double(std::string_view s) {
    double v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end || !std::isfinite(v)) return std::nullopt;
    return v;
}

// Integers may be written in exponent form when exact, e.g. 1e6.
std::optional<std::int64_t> to_int(std::string_view s) {
    std::int64_t v = 0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec == std::errc() && p == end) return v;
    if (auto d = to_double(s); d && std::trunc(*d) == *d && std::abs(*d) < 9.0e18)
        return static_cast<std::int64_t>(*d);
    return std::nullopt;
}

std::string unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return std::string(s);
}

std::vector<std::string_view> split_list(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = trim(s.substr(1, s.size() - 2));
    std::vector<std::string_view> parts;
    if (s.empty()) return parts;
    std::size_t start = 0;
    for (;;) {
        const auto comma = s.find(',', start);
        parts.push_back(trim(s.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return parts;
}

std::optional<Value> parse_value(ValueType t, std::string_view text) {
    text = trim(text);
    switch (t) {
        case ValueType::Int:
            if (auto v = to_int(text)) return Value(*v);
            return std::nullopt;
        case ValueType::Double:
            if (auto v = to_double(text)) return Value(*v);
            return std::nullopt;
        case ValueType::String: {
            auto s = unquote(text);
            if (s.empty()) return std::nullopt;
            return Value(std::move(s));
        }
        case ValueType::Bool:
            if (text == "true" || text == "yes" || text == "1") return Value(true);
            if (text == "false" || text == "no" || text == "0") return Value(false);
            return std::nullopt;
        case ValueType::IntList: {
            std::vector<std::int64_t> out;
            for (auto part : split_list(text)) {
                if (auto dots = part.find(".."); dots != std::string_view::npos) {
                    auto lo = to_int(trim(part.substr(0, dots)));
                    auto hi = to_int(trim(part.substr(dots + 2)));
                    if (!lo || !hi || *hi < *lo || *hi - *lo > 100000) return std::nullopt;
                    for (auto k = *lo; k <= *hi; ++k) out.push_back(k);
                } else if (auto v = to_int(part)) {
                    out.push_back(*v);
                } else {
                    return std::nullopt;
                }
            }
            if (out.empty()) return std::nullopt;
            return Value(std::move(out));
        }
        case ValueType::DoubleList: {
            std::vector<double> out;
            for (auto part : split_list(text)) {
                auto v = to_double(part);
                if (!v) return std::nullopt;
                out.push_back(*v);
            }
            if (out.empty()) return std::nullopt;
            return Value(std::move(out));
        }
        case ValueType::StringList: {
            std::vector<std::string> out;
            for (auto part : split_list(text)) {
                auto s = unquote(part);
                if (s.empty()) return std::nullopt;
                out.push_back(std::move(s));
            }
            if (out.empty()) return std::nullopt;
            return Value(std::move(out));
        }
    }
    return std::nullopt;
}

}  // namespace

ValueType key_type(std::string_view key) {
    for (const auto& k : kRegistry)
        if (k.key == key) return k.type;
    throw ConfigError("unknown key '" + std::string(key) + "'");
}

std::vector<std::string> known_keys() {
    std::vector<std::string> out;
    for (const auto& k : kRegistry) out.emplace_back(k.key);
    return out;
}

void Config::set(std::string_view key, std::string_view text, std::string_view origin) {
    ValueType t;
    try {
        t = key_type(key);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(origin) + ": " + e.what());
    }
    auto v = parse_value(t, text);
    if (!v)
        throw ConfigError(std::string(origin) + ": type mismatch for key '" + std::string(key) +
                          "': expected " + std::string(type_name(t)) + ", got '" +
                          std::string(trim(text)) + "'");
    values_.insert_or_assign(std::string(key), std::move(*v));
}

Config Config::parse(std::string_view text, std::string_view origin) {
    Config c;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        // A '#' inside quotes is kept.
        bool quoted = false;
        for (std::size_t k = 0; k < line.size(); ++k) {
            if (line[k] == '"') quoted = !quoted;
            if (line[k] == '#' && !quoted) {
                line = line.substr(0, k);
                break;
            }
        }
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = std::string(origin) + ":" + std::to_string(line_no);
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(where + ": expected 'key = value', got '" + std::string(line) + "'");
        c.set(trim(line.substr(0, eq)), line.substr(eq + 1), where);
    }
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path.string());
}

template <class T>
std::optional<T> Config::get(std::string_view key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return std::get<T>(it->second);
}

std::optional<std::int64_t> Config::get_int(std::string_view key) const { return get<std::int64_t>(key); }
std::optional<double> Config::get_double(std::string_view key) const { return get<double>(key); }
std::optional<std::string> Config::get_string(std::string_view key) const { return get<std::string>(key); }
std::optional<bool> Config::get_bool(std::string_view key) const { return get<bool>(key); }
std::optional<std::vector<std::int64_t>> Config::get_ints(std::string_view key) const {
    return get<std::vector<std::int64_t>>(key);
}
std::optional<std::vector<double>> Config::get_doubles(std::string_view key) const {
    return get<std::vector<double>>(key);
}
std::optional<std::vector<std::string>> Config::get_strings(std::string_view key) const {
    return get<std::vector<std::string>>(key);
}

void Config::require(std::string_view key) const {
    if (!has(key)) throw ConfigError("missing required key '" + std::string(key) + "'");
}

}  // namespace vcr::cli
