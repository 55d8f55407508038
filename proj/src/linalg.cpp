#include "jtenso/linalg.hpp"

#include <algorithm>
#include <numbers>

namespace jtenso {

bool solve3(const Mat3& m, const Vec3& b, Vec3& x, double tiny) {
  double scale = 0.0;
  for (const auto& row : m)
    for (double v : row) scale = std::max(scale, std::abs(v));
  const double d = det(m);
  if (scale == 0.0 || std::abs(d) <= tiny * scale * scale * scale) return false;
  for (int c = 0; c < 3; ++c) {
    Mat3 mc = m;
    for (int r = 0; r < 3; ++r) mc[r][c] = b[r];
    x[c] = det(mc) / d;
  }
  return true;
}

namespace {

using cplx = std::complex<double>;

cplx polish_root(double c2, double c1, double c0, cplx z) {
  for (int it = 0; it < 4; ++it) {
    const cplx p = ((z + c2) * z + c1) * z + c0;
    const cplx dp = (3.0 * z + 2.0 * c2) * z + c1;
    if (std::abs(dp) == 0.0) break;
    const cplx step = p / dp;
    z -= step;
    if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(z))) break;
  }
  return z;
}

}  // namespace

std::array<cplx, 3> cubic_roots(double c2, double c1, double c0) {
  // Depressed cubic t³ + p·t + q with λ = t − c2/3.
  const double shift = c2 / 3.0;
  const double p = c1 - c2 * c2 / 3.0;
  const double q = 2.0 * c2 * c2 * c2 / 27.0 - c2 * c1 / 3.0 + c0;
  const double disc = q * q / 4.0 + p * p * p / 27.0;

  std::array<cplx, 3> roots;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-q / 2.0 + sq);
    const double v = std::cbrt(-q / 2.0 - sq);
    const double re = -(u + v) / 2.0 - shift;
    const double im = std::sqrt(3.0) / 2.0 * std::abs(u - v);
    roots[0] = polish_root(c2, c1, c0, cplx(u + v - shift, 0.0));
    roots[0] = cplx(roots[0].real(), 0.0);
    roots[1] = polish_root(c2, c1, c0, cplx(re, im));
    roots[2] = std::conj(roots[1]);
    if (roots[1].imag() < 0.0) std::swap(roots[1], roots[2]);
  } else {
    // Three real roots (trigonometric form).
    const double r = std::sqrt(std::max(0.0, -p / 3.0));
    std::array<double, 3> t{};
    if (r == 0.0) {
      t = {0.0, 0.0, 0.0};
    } else {
      const double arg = std::clamp(-q / (2.0 * r * r * r), -1.0, 1.0);
      const double phi = std::acos(arg);
      for (int k = 0; k < 3; ++k)
        t[k] = 2.0 * r * std::cos((phi - 2.0 * std::numbers::pi * k) / 3.0);
    }
    std::sort(t.begin(), t.end());
    for (int k = 0; k < 3; ++k) {
      const cplx z = polish_root(c2, c1, c0, cplx(t[k] - shift, 0.0));
      roots[k] = cplx(z.real(), 0.0);
    }
  }
  return roots;
}

std::array<cplx, 3> eigenvalues(const Mat3& m) {
  // det(λI − m) = λ³ − tr·λ² + (sum of principal 2×2 minors)·λ − det
  const double tr = trace(m);
  const double minors = m[0][0] * m[1][1] - m[0][1] * m[1][0] +
                        m[0][0] * m[2][2] - m[0][2] * m[2][0] +
                        m[1][1] * m[2][2] - m[1][2] * m[2][1];
  return cubic_roots(-tr, minors, -det(m));
}

bool eigenvector(const Mat3& m, cplx lambda, std::array<cplx, 3>& v) {
  std::array<std::array<cplx, 3>, 3> a;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) a[i][j] = m[i][j] - (i == j ? lambda : cplx(0.0));

  auto cross_c = [](const std::array<cplx, 3>& p, const std::array<cplx, 3>& q) {
    return std::array<cplx, 3>{p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2],
                               p[0] * q[1] - p[1] * q[0]};
  };
  auto norm_c = [](const std::array<cplx, 3>& p) {
    return std::sqrt(std::norm(p[0]) + std::norm(p[1]) + std::norm(p[2]));
  };

  double best = 0.0;
  const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
  for (const auto& pr : pairs) {
    const auto c = cross_c(a[pr[0]], a[pr[1]]);
    const double n = norm_c(c);
    if (n > best) {
      best = n;
      v = c;
    }
  }
  double scale = 0.0;
  for (const auto& row : a) scale = std::max(scale, norm_c(row));
  return best > 1e-12 * scale * scale;
}

Vec3 singular_values(const Mat3& m) {
  // One-sided Jacobi: orthogonalize the columns of m.
  Mat3 u = m;
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int i = 0; i < 3; ++i) {
          alpha += u[i][p] * u[i][p];
          beta += u[i][q] * u[i][q];
          gamma += u[i][p] * u[i][q];
        }
        if (gamma == 0.0) continue;
        off = std::max(off, std::abs(gamma) / std::sqrt(alpha * beta));
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < 3; ++i) {
          const double up = u[i][p];
          const double uq = u[i][q];
          u[i][p] = c * up - s * uq;
          u[i][q] = s * up + c * uq;
        }
      }
    }
    if (off < 1e-15) break;
  }
  Vec3 sv{};
  for (int j = 0; j < 3; ++j)
    sv[j] = std::sqrt(u[0][j] * u[0][j] + u[1][j] * u[1][j] + u[2][j] * u[2][j]);
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

double max_singular_value(const Mat3& m) { return singular_values(m)[0]; }

std::array<cplx, 2> eigenvalues2(double a, double b, double c, double d) {
  const double tr = a + d;
  const double dt = a * d - b * c;
  const double disc = tr * tr / 4.0 - dt;
  std::array<cplx, 2> ev;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    // Stable form: compute the larger-modulus root first, the other from the
    // product of the roots.
    const double big = tr / 2.0 + std::copysign(s, tr);
    const double small = big != 0.0 ? dt / big : tr / 2.0 - std::copysign(s, tr);
    ev = {cplx(big, 0.0), cplx(small, 0.0)};
  } else {
    const double s = std::sqrt(-disc);
    ev = {cplx(tr / 2.0, s), cplx(tr / 2.0, -s)};
  }
  if (std::abs(ev[1]) > std::abs(ev[0])) std::swap(ev[0], ev[1]);
  return ev;
}

}  // namespace jtenso
