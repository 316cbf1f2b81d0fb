#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace mechsql {

/// One value of a flat output record.
using Cell = std::variant<double, std::int64_t, bool, std::string>;

/// Named-column table with a stable column order. Records of a single row
/// (e.g. a feasibility report) are tables with one row.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

/// Numbers print with 12 significant digits; booleans as true/false;
/// NaN/inf as nan/inf.
std::string format_cell(const Cell& cell);

void write_csv(std::ostream& out, const Table& table);

/// One JSON object per row. `record` (if non-empty) is added as the first
/// field so mixed streams stay self-describing.
void write_jsonl(std::ostream& out, const Table& table, const std::string& record = {});

} // namespace mechsql
