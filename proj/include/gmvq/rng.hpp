#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "gmvq/array.hpp"

namespace gmvq {

using Rng = std::mt19937_64;

/// Standard-normal draws, row-major fill order.
inline Mat draw_normal(Index r, Index c, Rng& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

/// Gumbel(0,1) draws via g = -log(-log(u)), with u clamped away from the
/// endpoints for stability.
inline Mat draw_gumbel(Index r, Index c, Rng& rng) {
  std::uniform_real_distribution<double> d(0.0, 1.0);
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) {
      const double u = std::clamp(d(rng), 1e-10, 1.0 - 1e-10);
      m(i, j) = -std::log(-std::log(u));
    }
  return m;
}

inline Mat draw_uniform(Index r, Index c, double lo, double hi, Rng& rng) {
  std::uniform_real_distribution<double> d(lo, hi);
  Mat m(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

}  // namespace gmvq
