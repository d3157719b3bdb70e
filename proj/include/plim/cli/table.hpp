#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plim::cli {

/// Numeric table with named columns, stored row-major.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  std::vector<double> column(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;
};

/// Header line then one line per row, 17 significant digits.
void write_csv(std::ostream& out, const Table& table);
void write_csv(const std::string& path, const Table& table);
/// Throws CorruptFile on ragged rows or non-numeric cells.
Table read_csv(std::istream& in);
Table read_csv(const std::string& path);

}  // namespace plim::cli
