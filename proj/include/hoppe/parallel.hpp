#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace hoppe {

/// Replicates are grouped into chunks of this size. Chunk boundaries do not
/// depend on the worker count, so chunked reductions are bit-reproducible.
inline constexpr std::size_t kReplicateChunk = 256;

inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs body(block_index, begin, end) for each block of [0, count).
/// Blocks are claimed dynamically; the body must only write block-local state.
template <class Body>
void parallel_blocks(std::size_t count, std::size_t block, unsigned threads, Body&& body) {
  const std::size_t blocks = (count + block - 1) / block;
  const unsigned workers =
      static_cast<unsigned>(std::min<std::size_t>(resolve_threads(threads), blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) {
      body(b, b * block, std::min(count, (b + 1) * block));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      for (std::size_t b = next++; b < blocks; b = next++) {
        body(b, b * block, std::min(count, (b + 1) * block));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = blocks;
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

/// Folds body(index, acc) over [0, count): one accumulator per chunk, then
/// merged left to right. Acc needs a default state and merge(const Acc&).
template <class Acc, class Body>
Acc reduce_replicates(std::size_t count, unsigned threads, Body&& body) {
  const std::size_t chunks = (count + kReplicateChunk - 1) / kReplicateChunk;
  std::vector<Acc> partial(chunks);
  parallel_blocks(count, kReplicateChunk, threads,
                  [&](std::size_t b, std::size_t begin, std::size_t end) {
                    Acc& acc = partial[b];
                    for (std::size_t i = begin; i < end; ++i) body(i, acc);
                  });
  Acc total{};
  for (const Acc& p : partial) total.merge(p);
  return total;
}

}  // namespace hoppe
