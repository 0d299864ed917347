#pragma once

#include <string>
#include <vector>

namespace mcn::csv {

/// Parsed CSV: header row plus string cells. No quoting/escaping — the
/// toolkit's formats are plain numeric tables with ISO dates.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

Table read_file(const std::string& path);
Table parse(const std::string& text);

/// Deterministic writer. Numeric cells are preformatted by the caller.
void write_file(const std::string& path, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows);

/// Shortest round-trip double format (printf %.17g trimmed); "nan" for NaN.
std::string format_double(double v);

/// Fixed-precision format used by report-style tables.
std::string format_fixed(double v, int digits);

double to_double(const std::string& cell, const std::string& context);

}  // namespace mcn::csv
