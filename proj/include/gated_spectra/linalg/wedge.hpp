#pragma once
// Exterior powers (compound matrices).

#include <cstddef>
#include <vector>

#include "gated_spectra/linalg/matrix.hpp"

namespace gspec {

/// Strictly increasing t-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t t);

/// The t-th compound matrix of a square M: entry (I, J) is det M[I, J] with
/// I, J running over combinations(n, t). Throws CapacityError when
/// binomial(n, t) > max_dim.
Matrix wedge(const Matrix& m, std::size_t t, std::size_t max_dim = 10000);

}  // namespace gspec
