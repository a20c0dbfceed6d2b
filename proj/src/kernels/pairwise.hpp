#pragma once

#include <cstddef>

// Included by each kernel translation unit; the anonymous namespace keeps the
// instantiations local so code compiled with -mavx2 never leaks into the
// scalar path through ODR merging.
namespace fiblab::kernels {
namespace {

// Recursive pairwise summation, split at len/2. Zero terms sum to `zero`.
template <class T, class Add>
T pairwise_sum(const T* v, std::size_t len, T zero, Add add) {
  if (len == 0) return zero;
  if (len == 1) return v[0];
  if (len == 2) return add(v[0], v[1]);
  const std::size_t half = len / 2;
  return add(pairwise_sum(v, half, zero, add), pairwise_sum(v + half, len - half, zero, add));
}

}  // namespace
}  // namespace fiblab::kernels
