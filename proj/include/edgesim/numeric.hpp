#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace edgesim {

/// Round to nearest integer, ties to even. Used for every float->int
/// conversion in the quantized pipeline so results are reproducible
/// across platforms (std::lround rounds half away from zero and FPU
/// rounding modes are not to be trusted in library code).
inline std::int64_t round_half_even(double x) {
  const double f = std::floor(x);
  const double r = x - f;
  auto lo = static_cast<std::int64_t>(f);
  if (r > 0.5) return lo + 1;
  if (r < 0.5) return lo;
  return (lo % 2 == 0) ? lo : lo + 1;  // exact tie
}

/// Arithmetic right shift by `n` with round-half-to-even semantics,
/// i.e. the integer nearest to x / 2^n. n == 0 returns x unchanged.
inline std::int64_t rounding_rshift_even(std::int64_t x, int n) {
  if (n <= 0) return x;
  const bool neg = x < 0;
  const std::uint64_t mag = neg ? static_cast<std::uint64_t>(-x) : static_cast<std::uint64_t>(x);
  const std::uint64_t q = mag >> n;
  const std::uint64_t rem = mag - (q << n);
  const std::uint64_t half = std::uint64_t{1} << (n - 1);
  std::uint64_t r = q;
  if (rem > half || (rem == half && (q & 1))) r = q + 1;
  return neg ? -static_cast<std::int64_t>(r) : static_cast<std::int64_t>(r);
}

inline void require(bool cond, const char* what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace edgesim
