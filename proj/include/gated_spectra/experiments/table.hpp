#pragma once
// Numeric result tables written as CSV (LF line endings, '.' decimal,
// shortest round-trip formatting). Non-finite values are only accepted in
// columns declared nullable and are written as nan, inf or -inf.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

namespace gspec {

struct Column {
  std::string name;
  bool nullable = false;
};

class ResultTable {
 public:
  ResultTable() = default;
  ResultTable(std::string name, std::vector<Column> columns);

  /// File stem, e.g. "spectrum" for spectrum.csv.
  const std::string& name() const noexcept { return name_; }
  const std::vector<Column>& columns() const noexcept { return columns_; }
  std::size_t row_count() const noexcept { return rows_.size(); }
  const std::vector<double>& row(std::size_t i) const { return rows_.at(i); }

  /// Throws ShapeMismatch on a wrong row length and NumericalFailure on a
  /// non-finite value in a column that is not nullable.
  void add_row(std::vector<double> values);

  /// Throws DomainError for unknown names.
  std::size_t column_index(const std::string& name) const;
  double at(std::size_t row, const std::string& column) const;
  std::vector<double> column_values(const std::string& column) const;

  std::string to_csv() const;
  void write_csv(const std::filesystem::path& path) const;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::vector<std::vector<double>> rows_;
};

/// Shortest representation that parses back to the same double.
std::string format_number(double v);

}  // namespace gspec
