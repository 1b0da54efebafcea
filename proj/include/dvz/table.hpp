#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace dvz {

using Cell = std::variant<std::int64_t, double, std::string>;

/// A CSV result table. The header row is mandatory.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    explicit Table(std::vector<std::string> columns = {}) : header(std::move(columns)) {}
    void add_row(std::vector<Cell> row);
    std::size_t column(const std::string& name) const;
    double number(std::size_t row, const std::string& name) const;
    friend bool operator==(const Table&, const Table&) = default;
};

/// Shortest decimal that parses back to the same double. Always carries a '.' or
/// an exponent so the reader can tell it from an integer.
std::string format_double(double x);
std::string format_cell(const Cell& c);

std::string to_csv(const Table& t);
void write_csv(std::ostream& os, const Table& t);

/// Cells are typed back by shape: integer literal, real literal, or string.
Table parse_csv(const std::string& text);

} // namespace dvz
