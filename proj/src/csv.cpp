#include "vcr/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <exception>
#include <sstream>

#include "vcr/errors.hpp"

namespace vcr {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), header_(std::move(header)) {
    emit(header_);
}

void CsvWriter::emit(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
}

CsvWriter::Row& CsvWriter::Row::operator<<(double v) {
    cells_.push_back(format_number(v));
    return *this;
}
CsvWriter::Row& CsvWriter::Row::operator<<(std::int64_t v) {
    cells_.push_back(std::to_string(v));
    return *this;
}
CsvWriter::Row& CsvWriter::Row::operator<<(std::uint64_t v) {
    cells_.push_back(std::to_string(v));
    return *this;
}
CsvWriter::Row& CsvWriter::Row::operator<<(std::string_view v) {
    if (v.find_first_of(",\n") != std::string_view::npos)
        throw Error("csv cell contains a separator: " + std::string(v));
    cells_.emplace_back(v);
    return *this;
}

CsvWriter::Row::~Row() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    if (cells_.size() != w_.width())
        throw Error("csv row has " + std::to_string(cells_.size()) + " cells, header has " +
                    std::to_string(w_.width()));
    w_.emit(cells_);
}

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    throw Error("csv has no column '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text) {
    CsvTable t;
    std::istringstream in{std::string(text)};
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

}  // namespace vcr
