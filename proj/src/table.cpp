#include "dvz/table.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "dvz/errors.hpp"

namespace dvz {

void Table::add_row(std::vector<Cell> row)
{
    if (row.size() != header.size())
        throw ValidationError("table row has " + std::to_string(row.size()) + " cells, header has " +
                              std::to_string(header.size()));
    rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    throw ValidationError("table has no column '" + name + "'");
}

double Table::number(std::size_t row, const std::string& name) const
{
    const Cell& c = rows.at(row).at(column(name));
    if (auto* i = std::get_if<std::int64_t>(&c))
        return static_cast<double>(*i);
    if (auto* d = std::get_if<double>(&c))
        return *d;
    throw ValidationError("column '" + name + "' is not numeric");
}

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    std::string s(buf, end);
    if (s.find_first_of(".e") == std::string::npos)
        s += ".0";
    return s;
}

namespace {

bool needs_quotes(const std::string& s)
{
    return s.empty() || s.find_first_of(",\"\n\r") != std::string::npos;
}

std::string quote(const std::string& s)
{
    if (!needs_quotes(s))
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

Cell parse_cell(const std::string& s, bool quoted)
{
    if (quoted)
        return s;
    if (s == "nan")
        return std::nan("");
    if (s == "inf")
        return HUGE_VAL;
    if (s == "-inf")
        return -HUGE_VAL;
    const char* b = s.data();
    const char* e = b + s.size();
    if (s.find_first_of(".eE") == std::string::npos) {
        std::int64_t i = 0;
        auto [p, ec] = std::from_chars(b, e, i);
        if (ec == std::errc() && p == e && !s.empty())
            return i;
    } else {
        double d = 0.0;
        auto [p, ec] = std::from_chars(b, e, d);
        if (ec == std::errc() && p == e)
            return d;
    }
    return s;
}

// Splits one record; handles quoted fields with doubled quotes and embedded newlines.
std::vector<std::pair<std::string, bool>> read_record(const std::string& text, std::size_t& pos)
{
    std::vector<std::pair<std::string, bool>> fields;
    std::string cur;
    bool quoted = false, in_quotes = false;
    while (pos < text.size()) {
        const char c = text[pos++];
        if (in_quotes) {
            if (c == '"') {
                if (pos < text.size() && text[pos] == '"') {
                    cur += '"';
                    ++pos;
                } else {
                    in_quotes = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            in_quotes = quoted = true;
        } else if (c == ',') {
            fields.emplace_back(std::move(cur), quoted);
            cur.clear();
            quoted = false;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && pos < text.size() && text[pos] == '\n')
                ++pos;
            break;
        } else {
            cur += c;
        }
    }
    if (in_quotes)
        throw ValidationError("csv: unterminated quoted field");
    fields.emplace_back(std::move(cur), quoted);
    return fields;
}

} // namespace

std::string format_cell(const Cell& c)
{
    if (auto* i = std::get_if<std::int64_t>(&c))
        return std::to_string(*i);
    if (auto* d = std::get_if<double>(&c))
        return format_double(*d);
    const auto& s = std::get<std::string>(c);
    // a string that reads as a number must stay a string
    if (!needs_quotes(s) && !std::holds_alternative<std::string>(parse_cell(s, false)))
        return '"' + s + '"';
    return quote(s);
}

void write_csv(std::ostream& os, const Table& t)
{
    if (t.header.empty())
        throw ValidationError("csv: header is mandatory");
    for (std::size_t i = 0; i < t.header.size(); ++i)
        os << (i ? "," : "") << quote(t.header[i]);
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << format_cell(row[i]);
        os << '\n';
    }
}

std::string to_csv(const Table& t)
{
    std::ostringstream os;
    write_csv(os, t);
    return os.str();
}

Table parse_csv(const std::string& text)
{
    std::size_t pos = 0;
    if (text.empty())
        throw ValidationError("csv: missing header");
    Table t;
    for (auto& [name, q] : read_record(text, pos))
        t.header.push_back(std::move(name));
    while (pos < text.size()) {
        auto fields = read_record(text, pos);
        if (fields.size() != t.header.size())
            throw ValidationError("csv: row with " + std::to_string(fields.size()) + " fields, expected " +
                                  std::to_string(t.header.size()));
        std::vector<Cell> row;
        row.reserve(fields.size());
        for (auto& [s, q] : fields)
            row.push_back(parse_cell(s, q));
        t.rows.push_back(std::move(row));
    }
    return t;
}

} // namespace dvz
