#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace facepsy::csv {

/// Splits one record. Fields may be double-quoted; "" inside quotes is a literal quote.
/// Throws ParseError on an unterminated quote.
std::vector<std::string> split_line(std::string_view line, const std::string& source, std::size_t line_no);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

std::string trim(std::string_view s);

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

/// Reads non-empty lines, stripping a trailing CR. Each entry is (line number, text).
std::vector<std::pair<std::size_t, std::string>> read_lines(std::istream& in);

}  // namespace facepsy::csv
