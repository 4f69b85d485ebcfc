#include "netbound/parallel.hpp"

#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace netbound {

void for_each_index(std::size_t n, Execution exec, const std::function<void(std::size_t)>& fn) {
  if (exec == Execution::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(netbound_for_each_index)
      {
        if (!first) first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

int available_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace netbound
