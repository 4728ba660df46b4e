#include "gated_spectra/linalg/wedge.hpp"

#include <string>

#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/util/errors.hpp"

namespace gspec {

std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t t) {
  std::vector<std::vector<std::size_t>> out;
  if (t > n) return out;
  std::vector<std::size_t> idx(t);
  for (std::size_t i = 0; i < t; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    // rightmost position that can still move
    std::size_t pos = t;
    while (pos > 0 && idx[pos - 1] == n - t + (pos - 1)) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < t; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

Matrix wedge(const Matrix& m, std::size_t t, std::size_t max_dim) {
  if (!m.is_square()) throw ShapeMismatch("wedge: matrix must be square");
  const std::size_t n = m.rows();
  if (t < 1 || t > n) throw DomainError("wedge: need 1 <= t <= n");

  // binomial with early exit so huge n does not overflow
  std::size_t dim = 1;
  for (std::size_t i = 0; i < t; ++i) {
    dim = dim * (n - i) / (i + 1);
    if (dim > max_dim)
      throw CapacityError("wedge: binomial(" + std::to_string(n) + "," + std::to_string(t) +
                          ") exceeds " + std::to_string(max_dim));
  }

  const auto sets = combinations(n, t);
  Matrix out(dim, dim);
  Matrix minor(t, t);
  for (std::size_t a = 0; a < dim; ++a) {
    for (std::size_t b = 0; b < dim; ++b) {
      for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = 0; j < t; ++j) minor(i, j) = m(sets[a][i], sets[b][j]);
      out(a, b) = determinant(minor);
    }
  }
  return out;
}

}  // namespace gspec
