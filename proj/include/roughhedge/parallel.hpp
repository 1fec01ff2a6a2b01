#pragma once

#include <cstddef>
#include <exception>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace roughhedge {

// Runs fn(i) for i in [0, n). Work items must be independent; the result can
// then not depend on the thread count. If several items throw, the exception
// of the lowest index is rethrown so failures are reproducible too.
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::exception_ptr first_error;
  std::size_t first_index = std::numeric_limits<std::size_t>::max();
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(roughhedge_parallel_error)
      {
        if (static_cast<std::size_t>(i) < first_index) {
          first_index = static_cast<std::size_t>(i);
          first_error = std::current_exception();
        }
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace roughhedge
