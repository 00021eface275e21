#pragma once

#include <cstdint>
#include <exception>
#include <vector>

#include "msform/kernels.hpp"

namespace msform::detail {

// Runs body(i) for i in [0, n), in parallel when requested and available.
// Each i must write disjoint output. An exception thrown by any body is
// rethrown after the loop; with several, the lowest index wins, matching
// what the serial loop would report.
template <typename Body>
void for_each_index(std::size_t n, Exec exec, Body&& body) {
  const auto count = static_cast<std::int64_t>(n);
#ifdef MSFORM_HAVE_OPENMP
  if (exec == Exec::kParallel && count > 1) {
    std::vector<std::exception_ptr> errors(n);
    bool failed = false;
#pragma omp parallel for schedule(static) reduction(|| : failed)
    for (std::int64_t i = 0; i < count; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
        failed = true;
      }
    }
    if (failed) {
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    return;
  }
#else
  (void)exec;
#endif
  for (std::int64_t i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

}  // namespace msform::detail
