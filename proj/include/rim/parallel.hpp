#pragma once

#include <cstddef>
#include <exception>

#include <omp.h>

namespace rim {

/// Selects between the OpenMP kernel and its serial reference.
enum class Execution { serial, parallel };

/// Runs body(i) for i in [0, n). Each index must write only to its own slot,
/// so both policies produce bit-identical results.
template <class Body>
void for_each_index(std::size_t n, Execution exec, Body&& body) {
  if (exec == Execution::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const auto count = static_cast<long long>(n);
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(rim_for_each_index)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

/// Caps the OpenMP worker count; 0 keeps the runtime default.
inline void set_worker_count(int workers) {
  if (workers > 0) omp_set_num_threads(workers);
}

}  // namespace rim
