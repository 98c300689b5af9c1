#ifndef KBI_CSV_HPP
#define KBI_CSV_HPP

#include <filesystem>
#include <string>
#include <vector>

namespace kbi::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const; // -1 when absent
};

/// Read a comma-separated file with a header row. UTF-8, '.' decimal
/// separator, no quoting. Empty cells come back as empty strings.
Table read(const std::filesystem::path& path);

/// Parse one line into cells (handles trailing '\r').
std::vector<std::string> split_line(const std::string& line);

/// Shortest round-trip decimal form of a double; "" stays "".
std::string format_double(double v);

double parse_double(const std::string& cell, const std::string& context);
long long parse_int(const std::string& cell, const std::string& context);

} // namespace kbi::csv

#endif // KBI_CSV_HPP
