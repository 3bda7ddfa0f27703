#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace qclt {

/// Splits [0, count) into `workers` contiguous chunks and runs
/// fn(begin, end) on each. The partition only affects scheduling; callers
/// write results into per-index slots and reduce afterwards in index order.
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    fn(std::size_t{0}, count);
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(workers, count);
  std::vector<std::exception_ptr> errors(chunks);
  {
    std::vector<std::jthread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t begin = count * c / chunks;
      const std::size_t end = count * (c + 1) / chunks;
      pool.emplace_back([&, c, begin, end] {
        try {
          fn(begin, end);
        } catch (...) {
          errors[c] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace qclt
