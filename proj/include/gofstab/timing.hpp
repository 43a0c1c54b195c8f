#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <vector>

namespace gof {

// Median wall time in nanoseconds of `calls` timed invocations of fn, after
// `warmup` untimed ones. fn must return something convertible to double; the
// results are accumulated so the calls cannot be optimized away.
template <class F>
double median_latency_ns(F&& fn, std::size_t calls = 1000, std::size_t warmup = 10) {
  using clock = std::chrono::steady_clock;
  volatile double sink = 0.0;
  for (std::size_t i = 0; i < warmup; ++i) sink = sink + static_cast<double>(fn());
  std::vector<double> ns(std::max<std::size_t>(calls, 1));
  for (auto& t : ns) {
    const auto start = clock::now();
    sink = sink + static_cast<double>(fn());
    t = std::chrono::duration<double, std::nano>(clock::now() - start).count();
  }
  std::nth_element(ns.begin(), ns.begin() + ns.size() / 2, ns.end());
  return ns[ns.size() / 2];
}

}  // namespace gof
