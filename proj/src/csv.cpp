#include "chainsde/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chainsde::csv {

std::string format(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    if (res.ec != std::errc())
        throw std::runtime_error("csv: failed to format a double");
    return std::string(buf, res.ptr);
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {
    if (columns_.empty()) throw std::invalid_argument("csv: need at least one column");
    for (const auto& c : columns_)
        if (c.find(',') != std::string::npos || c.find('\n') != std::string::npos)
            throw std::invalid_argument("csv: column names must not contain ',' or newlines");
}

void Table::add_row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format(v));
    add_row(cells);
}

void Table::add_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size())
        throw std::invalid_argument("csv: row width does not match the header");
    for (const auto& c : cells)
        if (c.find(',') != std::string::npos || c.find('\n') != std::string::npos)
            throw std::invalid_argument("csv: cells must not contain ',' or newlines");
    rows_.push_back(cells);
}

std::string Table::to_string() const {
    std::ostringstream os;
    for (std::size_t c = 0; c < columns_.size(); ++c)
        os << (c ? "," : "") << columns_[c];
    os << '\n';
    for (const auto& row : rows_) {
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
        os << '\n';
    }
    return os.str();
}

void Table::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("csv: cannot open " + path.string() + " for writing");
    const std::string body = to_string();
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error("csv: write failed for " + path.string());
}

}  // namespace chainsde::csv
