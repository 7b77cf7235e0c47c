#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

namespace skc {

enum class ExecMode { Serial, Parallel };

namespace detail {

// Fixed-block accumulation: partials are produced per block and summed in
// block order, so Serial and Parallel return bitwise-identical results and
// the value does not depend on the thread count.
template <int K, typename Term>
std::array<double, K> blocked_sum(std::int64_t n, ExecMode mode, Term&& term,
                                  std::int64_t block = 4096) {
  const std::int64_t nblocks = n > 0 ? (n + block - 1) / block : 0;
  std::vector<std::array<double, K>> partial(static_cast<std::size_t>(nblocks));
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) if (mode == ExecMode::Parallel)
#endif
  for (std::int64_t b = 0; b < nblocks; ++b) {
    std::array<double, K> acc{};
    const std::int64_t lo = b * block;
    const std::int64_t hi = std::min(n, lo + block);
    for (std::int64_t i = lo; i < hi; ++i) term(i, acc);
    partial[static_cast<std::size_t>(b)] = acc;
  }
  (void)mode;
  std::array<double, K> total{};
  for (const auto& p : partial)
    for (int k = 0; k < K; ++k) total[k] += p[k];
  return total;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail
}  // namespace skc
