#include "plim/cli/table.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "plim/error.hpp"

namespace plim::cli {

void Table::add_row(std::vector<double> row) {
  require(row.size() == columns.size(), "Table::add_row: expected " + std::to_string(columns.size()) + " values");
  rows.push_back(std::move(row));
}

std::size_t Table::index_of(const std::string& name) const {
  for (std::size_t k = 0; k < columns.size(); ++k)
    if (columns[k] == name) return k;
  throw Error(ErrorKind::Precondition, "Table: no column '" + name + "'");
}

std::vector<double> Table::column(const std::string& name) const {
  const std::size_t k = index_of(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[k]);
  return out;
}

void write_csv(std::ostream& out, const Table& table) {
  for (std::size_t k = 0; k < table.columns.size(); ++k) out << (k ? "," : "") << table.columns[k];
  out << '\n' << std::setprecision(17);
  for (const auto& r : table.rows) {
    for (std::size_t k = 0; k < r.size(); ++k) out << (k ? "," : "") << r[k];
    out << '\n';
  }
}

void write_csv(const std::string& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Config, "cannot write " + path);
  write_csv(out, table);
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& s, std::size_t line) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size())
    throw Error(ErrorKind::CorruptFile, "csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

Table read_csv(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::CorruptFile, "csv: missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.columns = split(line);
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.columns.size())
      throw Error(ErrorKind::CorruptFile, "csv line " + std::to_string(n) + ": expected " +
                                              std::to_string(t.columns.size()) + " cells");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, n));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::CorruptFile, "cannot open " + path);
  return read_csv(in);
}

}  // namespace plim::cli
