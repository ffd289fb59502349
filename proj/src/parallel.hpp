#pragma once

#include <cstddef>
#include <exception>

namespace mscan::detail {

// Runs body(i) for i in [0, count), in parallel when OpenMP is enabled.
// Results must go to pre-indexed slots. The first exception is rethrown on
// the calling thread.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(count); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(mscan_parallel_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace mscan::detail
