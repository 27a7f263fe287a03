#ifndef NDPP_PARALLEL_HPP
#define NDPP_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace ndpp {

/// Thread cap for block-parallel work. Reads NDPP_THREADS; defaults to the
/// hardware concurrency. Always at least one.
std::size_t thread_cap();

/// Runs fn(i) for i in [0, count). Tasks are independent; results must be
/// written to disjoint slots. Exceptions from any task are rethrown after all
/// threads have joined (the first one wins).
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace ndpp

#endif  // NDPP_PARALLEL_HPP
