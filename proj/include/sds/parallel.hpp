#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sds {

/// Process-wide cap on worker threads; 0 means hardware concurrency.
inline unsigned& thread_limit() {
  static unsigned limit = 0;
  return limit;
}

inline unsigned resolve_threads(unsigned requested) {
  if (requested == 0) requested = thread_limit();
  if (requested == 0) requested = std::max(1u, std::thread::hardware_concurrency());
  return requested;
}

inline constexpr std::uint64_t kTrialChunk = 4096;

/// Splits [0, count) into fixed-size chunks and hands them to `threads`
/// workers. Chunk boundaries depend only on `count`, never on the thread
/// count, so per-chunk results are reproducible. `body(chunk, begin, end)`
/// must write only to state owned by `chunk`.
template <class Body>
void for_each_chunk(std::uint64_t count, unsigned threads, Body&& body) {
  const std::uint64_t chunks = (count + kTrialChunk - 1) / kTrialChunk;
  auto run = [&](std::uint64_t c) {
    const std::uint64_t begin = c * kTrialChunk;
    body(c, begin, std::min(count, begin + kTrialChunk));
  };
  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads), chunks));
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) run(c);
    return;
  }
  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        try {
          for (std::uint64_t c = next++; c < chunks; c = next++) run(c);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

/// Counts trials for which `trial(index)` returns true.
template <class Trial>
std::uint64_t parallel_count(std::uint64_t count, unsigned threads, Trial&& trial) {
  std::vector<std::uint64_t> per_chunk((count + kTrialChunk - 1) / kTrialChunk, 0);
  for_each_chunk(count, threads, [&](std::uint64_t c, std::uint64_t begin, std::uint64_t end) {
    std::uint64_t hits = 0;
    for (std::uint64_t i = begin; i < end; ++i) hits += trial(i) ? 1 : 0;
    per_chunk[c] = hits;
  });
  std::uint64_t total = 0;
  for (auto h : per_chunk) total += h;
  return total;
}

}  // namespace sds
