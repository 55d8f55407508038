#pragma once

// Fixed-size vector/matrix helpers for the 3-D phase space.

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>

namespace jtenso {

template <std::size_t N>
using Vec = std::array<double, N>;

using Vec3 = Vec<3>;
using Mat3 = std::array<Vec3, 3>;  // row-major: m[row][col]

template <std::size_t N>
constexpr Vec<N> operator+(const Vec<N>& a, const Vec<N>& b) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] + b[i];
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator-(const Vec<N>& a, const Vec<N>& b) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = a[i] - b[i];
  return r;
}

template <std::size_t N>
constexpr Vec<N> operator*(double s, const Vec<N>& a) {
  Vec<N> r{};
  for (std::size_t i = 0; i < N; ++i) r[i] = s * a[i];
  return r;
}

template <std::size_t N>
constexpr double dot(const Vec<N>& a, const Vec<N>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
  return s;
}

template <std::size_t N>
inline double norm(const Vec<N>& a) {
  return std::sqrt(dot(a, a));
}

template <std::size_t N>
inline bool all_finite(const Vec<N>& a) {
  for (double v : a)
    if (!std::isfinite(v)) return false;
  return true;
}

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}

constexpr Mat3 identity3() {
  return {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

constexpr Vec3 operator*(const Mat3& m, const Vec3& v) {
  return {dot(m[0], v), dot(m[1], v), dot(m[2], v)};
}

constexpr Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
  return r;
}

constexpr Mat3 transpose(const Mat3& m) {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r[i][j] = m[j][i];
  return r;
}

constexpr double trace(const Mat3& m) { return m[0][0] + m[1][1] + m[2][2]; }

constexpr double det(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

/// Solves m·x = b by Cramer's rule. Returns false when |det| is below `tiny`
/// relative to the matrix scale.
bool solve3(const Mat3& m, const Vec3& b, Vec3& x, double tiny = 1e-14);

/// Roots of the monic cubic λ³ + c2·λ² + c1·λ + c0, real roots first
/// (ascending), then a complex pair with positive imaginary part first.
std::array<std::complex<double>, 3> cubic_roots(double c2, double c1, double c0);

/// Eigenvalues of a 3×3 real matrix via its characteristic polynomial,
/// polished by Newton on the polynomial.
std::array<std::complex<double>, 3> eigenvalues(const Mat3& m);

/// A null vector of (m − λI) for complex λ (unnormalized, largest cross
/// product of row pairs). Returns false when every row pair is parallel.
bool eigenvector(const Mat3& m, std::complex<double> lambda,
                 std::array<std::complex<double>, 3>& v);

/// Largest singular value of a 3×3 matrix (square root of the largest
/// eigenvalue of mᵀm).
double max_singular_value(const Mat3& m);

/// All three singular values, descending.
Vec3 singular_values(const Mat3& m);

/// Eigenvalues of a real 2×2 matrix [[a,b],[c,d]], ordered by descending
/// modulus.
std::array<std::complex<double>, 2> eigenvalues2(double a, double b, double c, double d);

}  // namespace jtenso
