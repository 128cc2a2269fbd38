#pragma once

#include <istream>
#include <string>
#include <vector>

namespace polydiag {

/// A header row plus data rows of raw string fields.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header, or -1.
    int column(const std::string& name) const;
};

/// Reads comma-separated text with an obligatory header row. Double-quoted
/// fields may contain commas and doubled quotes. Blank lines are skipped and a
/// UTF-8 byte-order mark is ignored. Every row must have as many fields as the
/// header.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Quotes a field for output when it contains a separator, quote or newline.
std::string csv_escape(const std::string& field);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace polydiag
