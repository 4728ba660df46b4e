#include "gated_spectra/experiments/table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "gated_spectra/util/errors.hpp"

namespace gspec {

ResultTable::ResultTable(std::string name, std::vector<Column> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {
  if (columns_.empty()) throw DomainError("ResultTable: no columns");
}

void ResultTable::add_row(std::vector<double> values) {
  if (values.size() != columns_.size())
    throw ShapeMismatch("ResultTable " + name_ + ": row has " + std::to_string(values.size()) +
                        " values, expected " + std::to_string(columns_.size()));
  for (std::size_t c = 0; c < values.size(); ++c)
    if (!std::isfinite(values[c]) && !columns_[c].nullable)
      throw NumericalFailure("ResultTable " + name_ + ": non-finite value in column " +
                             columns_[c].name);
  rows_.push_back(std::move(values));
}

std::size_t ResultTable::column_index(const std::string& name) const {
  for (std::size_t c = 0; c < columns_.size(); ++c)
    if (columns_[c].name == name) return c;
  throw DomainError("ResultTable " + name_ + ": no column " + name);
}

double ResultTable::at(std::size_t row, const std::string& column) const {
  return rows_.at(row)[column_index(column)];
}

std::vector<double> ResultTable::column_values(const std::string& column) const {
  const std::size_t c = column_index(column);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r[c]);
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // drops the sign of -0
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string ResultTable::to_csv() const {
  std::string out;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (c) out += ',';
    out += columns_[c].name;
  }
  out += '\n';
  for (const auto& r : rows_) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out += ',';
      out += format_number(r[c]);
    }
    out += '\n';
  }
  return out;
}

void ResultTable::write_csv(const std::filesystem::path& path) const {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open " + path.string() + " for writing");
  const std::string s = to_csv();
  f.write(s.data(), static_cast<std::streamsize>(s.size()));
  if (!f) throw ConfigError("failed writing " + path.string());
}

}  // namespace gspec
