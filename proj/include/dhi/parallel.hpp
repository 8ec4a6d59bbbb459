#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace dhi {

/// Splits [0, count) into `workers` contiguous chunks and runs
/// body(worker_index, begin, end) on each, one thread per chunk. Chunk
/// boundaries depend only on (count, workers). The first exception thrown
/// by any chunk is rethrown after all threads have joined.
template <typename Body>
void parallel_chunks(std::size_t count, unsigned workers, Body&& body) {
  workers = std::max(1u, workers);
  if (workers == 1 || count < 2) {
    body(std::size_t{0}, std::size_t{0}, count);
    return;
  }
  const std::size_t chunks = std::min<std::size_t>(workers, count);
  std::vector<std::exception_ptr> errors(chunks);
  {
    std::vector<std::jthread> threads;
    threads.reserve(chunks);
    for (std::size_t w = 0; w < chunks; ++w) {
      const std::size_t begin = count * w / chunks;
      const std::size_t end = count * (w + 1) / chunks;
      threads.emplace_back([&, w, begin, end] {
        try {
          body(w, begin, end);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace dhi
