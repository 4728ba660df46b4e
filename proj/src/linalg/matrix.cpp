#include "gated_spectra/linalg/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gated_spectra/simd/kernels.hpp"
#include "gated_spectra/util/errors.hpp"

namespace gspec {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols)
    throw ShapeMismatch("Matrix: " + std::to_string(data_.size()) + " entries for a " +
                        std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  if (!all_finite()) throw DomainError("Matrix: non-finite entry");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeMismatch("Matrix: ragged initializer");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  if (!all_finite()) throw DomainError("Matrix: non-finite entry");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> d) {
  Matrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

void Matrix::set_column(std::size_t j, std::span<const double> values) {
  if (values.size() != rows_) throw ShapeMismatch("set_column: length mismatch");
  for (std::size_t i = 0; i < rows_; ++i) (*this)(i, j) = values[i];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  constexpr std::size_t kTile = 32;
  for (std::size_t i0 = 0; i0 < rows_; i0 += kTile)
    for (std::size_t j0 = 0; j0 < cols_; j0 += kTile)
      for (std::size_t i = i0; i < std::min(rows_, i0 + kTile); ++i)
        for (std::size_t j = j0; j < std::min(cols_, j0 + kTile); ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
  if (r0 + nr > rows_ || c0 + nc > cols_) throw ShapeMismatch("block: out of range");
  Matrix b(nr, nc);
  for (std::size_t i = 0; i < nr; ++i)
    std::copy_n(data_.data() + (r0 + i) * cols_ + c0, nc, b.data() + i * nc);
  return b;
}

double Matrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double Matrix::frobenius_norm() const noexcept {
  double scale = max_abs();
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double acc = 0.0;
  for (double v : data_) {
    const double x = v / scale;
    acc += x * x;
  }
  return scale * std::sqrt(acc);
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw ShapeMismatch("operator+=: shapes");
  simd::kernels().axpy(1.0, other.data(), data(), data_.size());
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) throw ShapeMismatch("operator-=: shapes");
  simd::kernels().axpy(-1.0, other.data(), data(), data_.size());
  return *this;
}

Matrix& Matrix::operator*=(double alpha) noexcept {
  simd::kernels().scale(alpha, data(), data_.size());
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw ShapeMismatch("matrix product: " + std::to_string(a.rows()) + "x" +
                        std::to_string(a.cols()) + " times " + std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
  Matrix c(a.rows(), b.cols());
  if (c.empty()) return c;
  simd::kernels().gemm(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
  return c;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(double alpha, Matrix a) { return a *= alpha; }

Matrix transpose_times(const Matrix& a, const Matrix& b) { return a.transpose() * b; }
Matrix times_transpose(const Matrix& a, const Matrix& b) { return a * b.transpose(); }

double frobenius_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch("frobenius_inner");
  return simd::kernels().dot(a.data(), b.data(), a.size());
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeMismatch("max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.entries()[i] - b.entries()[i]));
  return m;
}

void scale_rows(Matrix& m, std::span<const double> factors) {
  if (factors.size() != m.rows()) throw ShapeMismatch("scale_rows");
  for (std::size_t i = 0; i < m.rows(); ++i)
    simd::kernels().scale(factors[i], m.row(i).data(), m.cols());
}

void scale_cols(Matrix& m, std::span<const double> factors) {
  if (factors.size() != m.cols()) throw ShapeMismatch("scale_cols");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) *= factors[j];
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) throw ShapeMismatch("matvec");
  std::vector<double> y(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    y[i] = simd::kernels().dot(m.row(i).data(), x.data(), x.size());
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeMismatch("dot");
  return simd::kernels().dot(a.data(), b.data(), a.size());
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace gspec
