#pragma once

// Independent reference computations used as test oracles.

#include <cmath>

#include "jtenso/linalg.hpp"

namespace oracle {

using namespace jtenso;

inline Mat3 scaled(const Mat3& m, double s) {
  Mat3 r = m;
  for (auto& row : r)
    for (auto& v : row) v *= s;
  return r;
}

inline Mat3 add(const Mat3& a, const Mat3& b) {
  Mat3 r = a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] += b[i][j];
  return r;
}

/// exp(A) by scaling and squaring with a 30-term Taylor series.
inline Mat3 expm(const Mat3& a) {
  double n = 0.0;
  for (const auto& row : a)
    for (double v : row) n = std::max(n, std::abs(v));
  int squarings = 0;
  while (n > 0.5) {
    n /= 2.0;
    ++squarings;
  }
  const Mat3 small = scaled(a, std::ldexp(1.0, -squarings));
  Mat3 term = jtenso::identity3(), sum = jtenso::identity3();
  for (int k = 1; k <= 30; ++k) {
    term = scaled(term * small, 1.0 / k);
    sum = add(sum, term);
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

/// Largest singular value from power iteration on AᵀA.
inline double max_singular(const Mat3& a) {
  const Mat3 ata = jtenso::transpose(a) * a;
  jtenso::Vec3 v{1.0, 0.7, 0.3};
  double lambda = 0.0;
  for (int i = 0; i < 500; ++i) {
    const auto w = ata * v;
    lambda = jtenso::norm(w);
    v = (1.0 / lambda) * w;
  }
  return std::sqrt(lambda);
}

}  // namespace oracle
