#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace qpg {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);
double parse_double(std::string_view text);

/// Writes `text` as '#'-prefixed comment lines.
void write_comment_block(std::ostream& out, std::string_view text);

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

}  // namespace qpg
