// csv.hpp
// Minimal comma-separated reader/writer for the project's flat file formats.
// Fields never contain commas or quotes, so no quoting rules are applied.

#pragma once

#include <cstddef>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mfindex::csv {

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Reads a header line, then one row per call to next(). Blank lines are skipped.
class Reader {
public:
    explicit Reader(const std::string& path);

    bool next();
    /// Column position by header name, or nullopt when the file lacks it.
    std::optional<std::size_t> column(std::string_view name) const;
    /// Like column() but throws ParseError naming the missing column.
    std::size_t require(std::string_view name) const;

    const std::string& field(std::size_t col) const;
    std::size_t line() const { return line_; }
    const std::string& path() const { return path_; }
    const std::vector<std::string>& header() const { return header_; }
    bool empty() const { return header_.empty(); }

    [[noreturn]] void fail(const std::string& what) const;

    double number(std::size_t col) const;
    long long integer(std::size_t col) const;

private:
    std::string path_;
    std::ifstream in_;
    std::vector<std::string> header_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> row_;
    std::size_t line_ = 0;
};

/// Shortest round-trip decimal text for a double.
std::string format_double(double v);

/// Parses a whole-string double; nullopt on trailing garbage or empty text.
std::optional<double> parse_double(std::string_view s);

}  // namespace mfindex::csv
