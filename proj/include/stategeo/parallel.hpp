#pragma once

// Data-parallel helpers. Every kernel that fans out over independent cells
// takes an Exec argument; Exec::Serial is the reference path kept for tests
// and benchmarks. Reductions never happen inside the parallel region: cells
// are written to their own slot and summed afterwards in a fixed pairwise
// order, so results are bitwise identical for any thread count.

#include <complex>
#include <cstddef>
#include <exception>
#include <span>

namespace stategeo {

enum class Exec { Serial, Parallel };

namespace detail {
// Below this many cells the fork/join overhead dominates.
inline constexpr std::ptrdiff_t kParallelThreshold = 64;
}  // namespace detail

template <class Fn>
void for_each_index(std::ptrdiff_t count, Exec exec, Fn&& fn) {
  if (exec == Exec::Parallel && count >= detail::kParallelThreshold) {
    // Exceptions may not leave an OpenMP region; keep the first and rethrow.
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < count; ++i) {
      try {
        fn(i);
      } catch (...) {
#pragma omp critical(stategeo_for_each_index)
        if (!failure) failure = std::current_exception();
      }
    }
    if (failure) std::rethrow_exception(failure);
  } else {
    for (std::ptrdiff_t i = 0; i < count; ++i) fn(i);
  }
}

template <class T>
[[nodiscard]] T pairwise_sum(std::span<const T> values) {
  if (values.empty()) return T{};
  if (values.size() <= 8) {
    T acc = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) acc += values[i];
    return acc;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

/// Number of worker threads the Parallel path will use.
[[nodiscard]] int worker_threads();

}  // namespace stategeo
