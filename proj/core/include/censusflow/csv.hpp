#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace censusflow::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  // 1-based source line of each data row (multi-line quoted cells advance it).
  std::vector<std::size_t> lines;
};

// RFC 4180 reader: quoted cells may contain separators, doubled quotes and
// newlines. A UTF-8 BOM is skipped. Throws Error(Parse) on an unterminated
// quote.
std::vector<Row> parse(std::string_view text, char separator = ',');

// First row becomes the header. Throws Error(EmptyFile) when there is no header.
Table parse_table(std::string_view text, char separator = ',');

std::string escape(std::string_view cell, char separator = ',');
void write_row(std::ostream& out, const Row& row, char separator = ',');

}  // namespace censusflow::csv
