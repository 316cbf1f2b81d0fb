#include "mechsql/table.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace mechsql {

void Table::add_row(std::vector<Cell> row)
{
    if (row.size() != columns.size())
        throw std::logic_error(fmt::format("row has {} cells, table has {} columns", row.size(), columns.size()));
    rows.push_back(std::move(row));
}

std::string format_cell(const Cell& cell)
{
    return std::visit([](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
            if (std::isnan(v))
                return "nan";
            if (std::isinf(v))
                return v > 0 ? "inf" : "-inf";
            return fmt::format("{:.12g}", v);
        } else if constexpr (std::is_same_v<T, bool>) {
            return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
            return std::to_string(v);
        } else {
            return v;
        }
    }, cell);
}

namespace {

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + "\"";
}

nlohmann::ordered_json to_json(const Cell& cell)
{
    return std::visit([](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
            // JSON has no NaN/inf; emit them as strings.
            if (!std::isfinite(v))
                return format_cell(v);
            // Round-trip through the 12-digit text so CSV and JSON agree.
            return std::stod(format_cell(v));
        } else {
            return v;
        }
    }, cell);
}

} // namespace

void write_csv(std::ostream& out, const Table& table)
{
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        out << (i ? "," : "") << csv_escape(table.columns[i]);
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            out << (i ? "," : "") << csv_escape(format_cell(row[i]));
        out << '\n';
    }
}

void write_jsonl(std::ostream& out, const Table& table, const std::string& record)
{
    for (const auto& row : table.rows) {
        nlohmann::ordered_json obj;
        if (!record.empty())
            obj["record"] = record;
        for (std::size_t i = 0; i < row.size(); ++i)
            obj[table.columns[i]] = to_json(row[i]);
        out << obj.dump() << '\n';
    }
}

} // namespace mechsql
