#pragma once

// Command-line front end: a flat `key = value` configuration layer shared by
// every subcommand, and the dispatcher the `vcr` binary calls.
//
// Config grammar, one entry per line:
//   key = value        value is a number, a bare or "quoted" string, a
//                      boolean (true/false), or a comma list, optionally in [ ]
//   # comment          also allowed after a value
// Integer lists accept ranges such as 1..6.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace vcr::cli {

enum class ValueType { Int, Double, String, Bool, IntList, DoubleList, StringList };

// Throws ConfigError for a key that is not in the registry.
ValueType key_type(std::string_view key);
std::vector<std::string> known_keys();

using Value = std::variant<std::int64_t, double, std::string, bool, std::vector<std::int64_t>,
                           std::vector<double>, std::vector<std::string>>;

class Config {
public:
    static Config parse(std::string_view text, std::string_view origin = "config");
    static Config load(const std::filesystem::path& path);

    // Parses `text` as the registered type of `key`; later sets win.
    void set(std::string_view key, std::string_view text, std::string_view origin = "flag");

    [[nodiscard]] bool has(std::string_view key) const { return values_.contains(std::string(key)); }
    [[nodiscard]] std::optional<std::int64_t> get_int(std::string_view key) const;
    [[nodiscard]] std::optional<double> get_double(std::string_view key) const;
    [[nodiscard]] std::optional<std::string> get_string(std::string_view key) const;
    [[nodiscard]] std::optional<bool> get_bool(std::string_view key) const;
    [[nodiscard]] std::optional<std::vector<std::int64_t>> get_ints(std::string_view key) const;
    [[nodiscard]] std::optional<std::vector<double>> get_doubles(std::string_view key) const;
    [[nodiscard]] std::optional<std::vector<std::string>> get_strings(std::string_view key) const;

    // Throws ConfigError naming the key when absent.
    void require(std::string_view key) const;

private:
    template <class T>
    std::optional<T> get(std::string_view key) const;

    std::map<std::string, Value, std::less<>> values_;
};

// Exit codes: 0 success, 1 usage or configuration error, 2 runtime or
// statistical failure.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace vcr::cli
