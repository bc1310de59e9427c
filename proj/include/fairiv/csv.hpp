#pragma once

#include <string>
#include <vector>

#include "fairiv/npiv.hpp"

namespace fairiv {

// 17 significant digits, enough to round-trip a double exactly.
std::string format_double(double x);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Parse errors carry "path:line:" prefixes.
CsvTable read_csv(const std::string& path);

// Writes to a sibling temp file and renames it into place, so an existing
// file is never left half-overwritten.
void write_csv_atomic(const std::string& path, const CsvTable& table);
void write_text_atomic(const std::string& path, const std::string& text);

Sample read_sample(const std::string& path);
void write_sample(const std::string& path, const Sample& sample);

}  // namespace fairiv
