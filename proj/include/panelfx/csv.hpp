#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace panelfx {

/// In-memory CSV contents: a header row plus data rows of raw strings.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const; // -1 when absent
};

/// Reads an RFC-style CSV file: comma-delimited, double-quote quoting with
/// "" escapes, quoted fields may contain commas and newlines. Leading lines
/// starting with '#' are skipped so our own emitted tables round-trip.
CsvTable read_csv(const std::string& path);

/// Streaming writer with matching quoting rules. Lines end with '\n'.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void comment(const std::string& text);
    void row(const std::vector<std::string>& fields);

    static std::string escape(const std::string& field);

private:
    std::ostream& out_;
};

/// Shortest round-trip-safe decimal for a double ("%.17g" class formatting,
/// trimmed to the shortest string that parses back exactly).
std::string format_double(double v);

/// Fixed-precision formatting for report tables.
std::string format_fixed(double v, int digits);

/// FNV-1a 64-bit over a file's bytes, as 16 hex chars. Used for manifests.
std::string file_hash_hex(const std::string& path);
std::string bytes_hash_hex(const std::string& bytes);

} // namespace panelfx
