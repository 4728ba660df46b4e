#pragma once

namespace gspec {

/// Digamma psi(x) for x > 0, relative error about 1e-15 away from the root
/// near 1.4616. Throws DomainError for x <= 0 or non-finite x.
double digamma(double x);

/// log of the binomial coefficient n choose k.
double log_binomial(unsigned n, unsigned k);

}  // namespace gspec
