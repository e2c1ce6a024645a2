#include "textseam/parallel.hpp"

#include <omp.h>

#include <atomic>

namespace textseam {

namespace {
std::atomic<int> g_max_threads{0};
}

void set_max_threads(int n) { g_max_threads.store(n < 0 ? 0 : n); }

int max_threads() {
  const int cap = g_max_threads.load();
  return cap > 0 ? cap : omp_get_max_threads();
}

}  // namespace textseam
