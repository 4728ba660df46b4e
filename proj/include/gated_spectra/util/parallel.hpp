#pragma once
// Fork-join loop over independent trials. Callers write results into
// per-index slots and reduce afterwards in index order, so output does not
// depend on the schedule.

#include <cstddef>
#include <functional>

namespace gspec {

/// Worker count: hardware concurrency, capped by GATED_SPECTRA_THREADS when
/// that is set to a positive integer.
std::size_t worker_count();

/// Calls body(i) for i in [0, count). The first exception thrown by any
/// iteration is rethrown on the calling thread after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace gspec
