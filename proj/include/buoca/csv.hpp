#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace buoca::csv {

using Row = std::vector<std::string>;

// RFC-4180-style reader: quoted fields may contain commas, newlines, and
// doubled quotes. CRLF and LF records are both accepted; blank lines are
// skipped. Throws ParseError on unterminated quotes or stray quote chars.
std::vector<Row> read(std::istream& in);

// Convenience wrapper; throws IoError when the file cannot be opened.
std::vector<Row> read_file(const std::filesystem::path& path);

// Quotes the field only when needed (comma, quote, CR, LF present).
std::string escape(std::string_view field);

void write_row(std::ostream& out, std::span<const std::string> fields);

// Shortest decimal form that round-trips the double; stable across reruns.
std::string number(double value);

}  // namespace buoca::csv
