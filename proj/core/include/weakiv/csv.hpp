#pragma once

#include <optional>
#include <string>
#include <vector>

namespace weakiv {

// Minimal strict CSV support: comma separation, header row required, no
// quoting (the data files this library consumes are plain numeric tables).
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column_index(const std::string& name) const;
};

CsvTable read_csv(const std::string& path);

// True for empty cells and the conventional NA markers.
bool csv_cell_missing(const std::string& cell);

// Parses a full cell as double; throws ParseError naming the context.
double csv_parse_double(const std::string& cell, const std::string& context);

}  // namespace weakiv
