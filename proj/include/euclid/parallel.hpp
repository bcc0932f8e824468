#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <utility>
#include <vector>

namespace euclid {

inline unsigned resolve_workers(unsigned requested, std::uint64_t num_blocks) {
  unsigned w = requested;
  if (w == 0) {
    w = std::thread::hardware_concurrency();
    if (w == 0) w = 1;
  }
  if (static_cast<std::uint64_t>(w) > num_blocks) w = static_cast<unsigned>(num_blocks);
  return w == 0 ? 1 : w;
}

// Splits [lo, hi) into fixed-width blocks and runs `body(block_lo, block_hi,
// partial, scratch)` once per block, each block writing into its own slot of
// the returned vector. Workers pull blocks from a shared counter, so load
// balancing is dynamic, but the slot layout depends only on (lo, hi, width).
// Callers that merge slots in index order therefore get results that are
// independent of the worker count. `make_scratch()` builds one per-thread
// workspace (reused across that thread's blocks).
template <class Partial, class MakeScratch, class Body>
std::vector<Partial> parallel_block_map(std::uint64_t lo, std::uint64_t hi,
                                        std::uint64_t width, unsigned workers,
                                        MakeScratch&& make_scratch, Body&& body) {
  if (hi <= lo) return {};
  if (width == 0) width = 1;
  const std::uint64_t num_blocks = (hi - lo + width - 1) / width;
  std::vector<Partial> slots(num_blocks);
  const unsigned w = resolve_workers(workers, num_blocks);

  auto run_range = [&](auto& scratch, std::uint64_t block) {
    const std::uint64_t blo = lo + block * width;
    const std::uint64_t bhi = std::min(hi, blo + width);
    body(blo, bhi, slots[block], scratch);
  };

  if (w == 1) {
    auto scratch = make_scratch();
    for (std::uint64_t b = 0; b < num_blocks; ++b) run_range(scratch, b);
    return slots;
  }

  std::atomic<std::uint64_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (unsigned t = 0; t < w; ++t) {
    pool.emplace_back([&] {
      try {
        auto scratch = make_scratch();
        for (;;) {
          const std::uint64_t b = next.fetch_add(1, std::memory_order_relaxed);
          if (b >= num_blocks || failed.load(std::memory_order_relaxed)) break;
          run_range(scratch, b);
        }
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return slots;
}

}  // namespace euclid
