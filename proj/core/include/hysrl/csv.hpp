#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hysrl {

/// Shortest round-trip decimal form; "nan"/"inf" spelled out.
std::string format_double(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index or -1.
    int column(std::string_view name) const;
};

/// Plain comma-separated parsing (no quoting); blank lines skipped.
CsvTable parse_csv(std::string_view text);

}  // namespace hysrl
