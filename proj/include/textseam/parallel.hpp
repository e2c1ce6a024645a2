#pragma once

#include <cstddef>
#include <exception>
#include <mutex>

namespace textseam {

// Caps the OpenMP worker count used by every parallel kernel. 0 restores the runtime default.
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n) across OpenMP threads. If any call throws, the
// exception from the lowest failing index is rethrown after the loop.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  std::exception_ptr first_error;
  std::size_t first_index = n;
  std::mutex guard;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1) num_threads(max_threads())
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard lock(guard);
      if (static_cast<std::size_t>(i) < first_index) {
        first_index = static_cast<std::size_t>(i);
        first_error = std::current_exception();
      }
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace textseam
