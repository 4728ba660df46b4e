#pragma once
// Householder QR on the transposed working copy so that every reflector
// application is a contiguous dot/axpy pair.

#include <cstddef>
#include <vector>

#include "gated_spectra/linalg/matrix.hpp"

namespace gspec::detail {

struct HouseholderQr {
  Matrix Qt;                      // n x m: rows are the columns of Q
  Matrix R;                       // n x n upper triangular
  std::vector<std::size_t> perm;  // column k of M*P is column perm[k] of M
};

/// m >= n required. With `pivot` set, columns are chosen by largest
/// remaining norm. R_ii is made non-negative.
HouseholderQr householder_qr(const Matrix& m, bool pivot);

}  // namespace gspec::detail
