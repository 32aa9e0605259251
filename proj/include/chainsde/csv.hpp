#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace chainsde::csv {

// Shortest decimal representation that round-trips the exact double value,
// so rewriting an artifact from the same numbers is byte-identical.
std::string format(double value);

class Table {
public:
    explicit Table(std::vector<std::string> columns);

    void add_row(const std::vector<double>& values);
    void add_row(const std::vector<std::string>& cells);

    std::size_t rows() const { return rows_.size(); }
    std::string to_string() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<std::string>> rows_;
};

}  // namespace chainsde::csv
