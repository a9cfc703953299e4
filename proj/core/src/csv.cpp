#include "censusflow/csv.hpp"

#include "censusflow/error.hpp"

namespace censusflow::csv {

namespace {

std::vector<Row> parse_with_lines(std::string_view text, char separator,
                                  std::vector<std::size_t>* lines) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<Row> rows;
  Row row;
  std::string cell;
  bool in_quotes = false;
  bool cell_started = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto end_row = [&] {
    row.push_back(std::move(cell));
    cell.clear();
    cell_started = false;
    // Blank lines carry no data.
    if (!(row.size() == 1 && row.front().empty())) {
      rows.push_back(std::move(row));
      if (lines) lines->push_back(row_line);
    }
    row.clear();
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        cell.push_back(c);
      }
      continue;
    }
    if (c == '"' && !cell_started) {
      in_quotes = true;
      cell_started = true;
    } else if (c == separator) {
      row.push_back(std::move(cell));
      cell.clear();
      cell_started = false;
    } else if (c == '\r') {
      // CRLF handled at the '\n'.
    } else if (c == '\n') {
      end_row();
      ++line;
      row_line = line;
    } else {
      cell.push_back(c);
      cell_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::Parse, "unterminated quoted cell starting on line " + std::to_string(row_line));
  if (cell_started || !cell.empty() || !row.empty()) end_row();
  return rows;
}

}  // namespace

std::vector<Row> parse(std::string_view text, char separator) {
  return parse_with_lines(text, separator, nullptr);
}

Table parse_table(std::string_view text, char separator) {
  std::vector<std::size_t> lines;
  auto rows = parse_with_lines(text, separator, &lines);
  if (rows.empty()) throw Error(ErrorCode::EmptyFile, "no header row");
  Table table;
  table.header = std::move(rows.front());
  table.rows.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
  table.lines.assign(lines.begin() + 1, lines.end());
  return table;
}

std::string escape(std::string_view cell, char separator) {
  const bool needs_quotes = cell.find_first_of(std::string{separator, '"', '\n', '\r'}) != std::string_view::npos;
  if (!needs_quotes) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row, char separator) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out.put(separator);
    out << escape(row[i], separator);
  }
  out.put('\n');
}

}  // namespace censusflow::csv
