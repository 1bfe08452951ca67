// Work-sharing loop used by the parallel builders. Index order of results is up to the caller.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace whits::detail {

/// Calls body(i) for i in [0, n) on up to `threads` threads; the first exception is rethrown.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body, std::size_t chunk = 1) {
  chunk = std::max<std::size_t>(chunk, 1);
  const std::size_t blocks = (n + chunk - 1) / chunk;
  const auto workers = static_cast<unsigned>(std::clamp<std::size_t>(blocks, 1, std::max(threads, 1u)));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    try {
      for (std::size_t start = next.fetch_add(chunk); start < n && !failed; start = next.fetch_add(chunk)) {
        const std::size_t end = std::min(n, start + chunk);
        for (std::size_t i = start; i < end; ++i) body(i);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      failed = true;
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace whits::detail
