#pragma once

#include "cohaudit/core.hpp"

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace cohaudit {

/// Number of worker threads to use when the caller asked for `requested`
/// (0 means "all available cores").
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Calls fn(i) for every i in [0, count) using up to `threads` workers.
///
/// Work is split into contiguous chunks. fn must only write to slots owned by
/// index i; with that discipline results do not depend on the thread count.
/// The exception thrown for the lowest failing chunk is rethrown.
template <typename Fn>
void parallel_for(Index count, unsigned threads, Fn&& fn) {
  if (count <= 0) return;
  const auto workers = static_cast<Index>(
      std::min<Index>(static_cast<Index>(resolve_threads(threads)), count));
  if (workers <= 1) {
    for (Index i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (Index w = 0; w < workers; ++w) {
      const Index begin = count * w / workers;
      const Index end = count * (w + 1) / workers;
      pool.emplace_back([&, w, begin, end] {
        try {
          for (Index i = begin; i < end; ++i) fn(i);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace cohaudit
