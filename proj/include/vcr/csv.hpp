#pragma once

#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace vcr {

// Shortest decimal that parses back to the same double.
std::string format_number(double v);

// Header is written on construction; every row must have the same width.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> header);

    class Row {
    public:
        Row& operator<<(double v);
        Row& operator<<(std::int64_t v);
        Row& operator<<(std::uint64_t v);
        Row& operator<<(int v) { return *this << static_cast<std::int64_t>(v); }
        Row& operator<<(std::string_view v);
        Row& operator<<(const char* v) { return *this << std::string_view(v); }
        Row& operator<<(const std::string& v) { return *this << std::string_view(v); }
        ~Row() noexcept(false);
        Row(const Row&) = delete;
        Row& operator=(const Row&) = delete;

    private:
        friend class CsvWriter;
        explicit Row(CsvWriter& w) : w_(w) {}
        CsvWriter& w_;
        std::vector<std::string> cells_;
    };

    Row row() { return Row(*this); }
    [[nodiscard]] std::size_t width() const { return header_.size(); }

private:
    void emit(const std::vector<std::string>& cells);
    std::ostream& out_;
    std::vector<std::string> header_;
};

// Minimal reader for files this tool wrote: no quoting, comma separated.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    [[nodiscard]] std::size_t column(std::string_view name) const;  // throws if absent
};
CsvTable parse_csv(std::string_view text);

}  // namespace vcr
