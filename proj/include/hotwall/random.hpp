#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <random>
#include <thread>
#include <vector>

namespace hotwall {

/// Explicit random stream. Streams built from the same (seed, stream) pair
/// produce identical sequences on every platform using libstdc++'s mt19937_64.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in the open interval (0, 1), built from the top 53 bits.
  double uniform() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  /// Fresh seed for deriving child streams; advances this stream.
  std::uint64_t fork_seed() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Process-wide worker count for Monte Carlo replica loops (default 1).
void set_thread_count(int threads);
int thread_count();

/// Runs `fn(rng, begin, end)` over fixed-size replica blocks. Block b gets the
/// stream Rng(base_seed, b), so results are identical for any thread count.
/// Returns one result per block, in block order.
template <typename Result, typename Fn>
std::vector<Result> run_blocks(std::uint64_t base_seed, std::size_t n_replicas, Fn&& fn,
                               std::size_t block_size = 256) {
  const std::size_t n_blocks = (n_replicas + block_size - 1) / block_size;
  std::vector<Result> results(n_blocks);
  auto work = [&](std::size_t b) {
    Rng rng(base_seed, b);
    const std::size_t begin = b * block_size;
    const std::size_t end = std::min(n_replicas, begin + block_size);
    results[b] = fn(rng, begin, end);
  };
  const int threads = std::min<int>(thread_count(), static_cast<int>(n_blocks));
  if (threads <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) work(b);
    return results;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int k = 0; k < threads; ++k) {
      pool.emplace_back([&, k] {
        try {
          for (std::size_t b = next++; b < n_blocks; b = next++) work(b);
        } catch (...) {
          errors[static_cast<std::size_t>(k)] = std::current_exception();
          next = n_blocks;
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace hotwall
