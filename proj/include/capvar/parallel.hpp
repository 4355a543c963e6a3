#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace capvar {

/// Number of worker threads used by parallel loops (at least 1).
int worker_threads();
void set_worker_threads(int n);

/// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
/// write into per-index slots so results never depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Pairwise (tree) summation in index order.
double pairwise_sum(std::span<const double> values);

template <class F>
double parallel_sum(std::size_t n, F&& term) {
    std::vector<double> slots(n);
    parallel_for(n, [&](std::size_t i) { slots[i] = term(i); });
    return pairwise_sum(slots);
}

}  // namespace capvar
