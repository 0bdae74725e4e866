#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace slateval {

/// Pairwise (tree) summation. The association order depends only on the length,
/// so any split of the work across threads reproduces the same bits.
double pairwise_sum(std::span<const double> values);

inline double mean_of(std::span<const double> values) {
  return values.empty() ? 0.0 : pairwise_sum(values) / static_cast<double>(values.size());
}

/// Runs body(i) for i in [0, count) across up to `threads` workers. Each index is
/// visited exactly once; the first exception thrown by any task is rethrown.
template <typename Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

}  // namespace slateval

#include "slateval/detail/parallel_for.hpp"
