#include "fishnav/parallel.hpp"

#include <atomic>

namespace fishnav {

namespace {
std::atomic<int> g_thread_cap{0};
}

void set_thread_cap(int threads) { g_thread_cap = std::max(0, threads); }

int thread_cap() {
  const int cap = g_thread_cap.load();
  if (cap > 0) return cap;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace fishnav
