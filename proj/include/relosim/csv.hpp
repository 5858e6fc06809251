#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace relosim {

// Minimal CSV support: comma-separated, first row is the header, no quoting
// (none of the emitted fields contain commas). Doubles are written with
// shortest-round-trip formatting so rewritten files are byte-stable.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index for `name`; throws IoError if absent.
    std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

std::string format_double(double v);
double parse_double(const std::string& s, const std::string& context);
long long parse_int(const std::string& s, const std::string& context);

} // namespace relosim
