#pragma once

#include <cmath>
#include <random>

#include "ipd/grid.hpp"

namespace testing {

inline ipd::RealGrid random_grid(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0,
                                 double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  ipd::RealGrid u(rows, cols);
  for (double& v : u.values()) v = d(rng);
  return u;
}

inline ipd::VectorField random_field(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  return {random_grid(rows, cols, seed), random_grid(rows, cols, seed ^ 0x9e3779b97f4a7c15ULL)};
}

inline double max_abs_diff(const ipd::RealGrid& a, const ipd::RealGrid& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace testing
