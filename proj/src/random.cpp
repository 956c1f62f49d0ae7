#include "hotwall/random.hpp"

#include <stdexcept>

namespace hotwall {
namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int threads) {
  if (threads < 1) throw std::invalid_argument("thread count must be at least 1");
  g_threads = threads;
}

int thread_count() { return g_threads; }

}  // namespace hotwall
