#pragma once

#include <string>
#include <vector>

namespace fpif {

/// FNV-1a 64-bit hash, hex-encoded. Used for run directory names.
std::string fnv1a_hex(const std::string& text);

/// Shortest round-trip decimal form of a double (%.17g trimmed).
std::string format_double(double v);

/// Write a CSV file with one header row; cells are format_double'd, so two
/// runs with identical numbers produce byte-identical files.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// ISO-8601 UTC timestamp; appears only in manifests, never in CSV bodies.
std::string utc_timestamp();

}  // namespace fpif
