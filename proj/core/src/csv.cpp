#include "weakiv/csv.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "weakiv/errors.hpp"

namespace weakiv {

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::optional<std::size_t> CsvTable::column_index(const std::string& name) const {
  for (std::size_t j = 0; j < columns.size(); ++j)
    if (columns[j] == name) return j;
  return std::nullopt;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  CsvTable table;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header && line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF)
      line = line.substr(3);  // strip UTF-8 BOM
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.push_back("");
    if (header) {
      table.columns = cells;
      if (table.columns.empty()) throw ParseError("empty header in " + path);
      header = false;
      continue;
    }
    if (cells.empty() || (cells.size() == 1 && cells[0].empty())) continue;
    if (cells.size() != table.columns.size())
      throw ParseError(path + ": row " + std::to_string(table.rows.size() + 2) + " has " +
                       std::to_string(cells.size()) + " cells, expected " +
                       std::to_string(table.columns.size()));
    table.rows.push_back(std::move(cells));
  }
  if (table.columns.empty() || table.rows.empty()) throw ParseError(path + " has no data rows");
  return table;
}

bool csv_cell_missing(const std::string& cell) {
  if (cell.empty()) return true;
  std::string lower;
  for (char c : cell) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  return lower == "na" || lower == "nan" || lower == ".";
}

double csv_parse_double(const std::string& cell, const std::string& context) {
  try {
    std::size_t used = 0;
    double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse numeric value '" + cell + "' in " + context);
  }
}

}  // namespace weakiv
