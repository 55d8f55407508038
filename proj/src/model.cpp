#include "jtenso/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "jtenso/error.hpp"

namespace jtenso {

void ModelParams::validate() const {
  for (double v : {delta, rho, c, k, a})
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "model parameters must be finite");
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  if (!(rho > 0.0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
}

void Forcing::validate() const {
  for (double v : {a0, amplitude, omega, noise_sigma})
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "forcing fields must be finite");
  if (amplitude < 0.0) throw Error(ErrorCode::InvalidArgument, "forcing amplitude must be >= 0");
  if (noise_sigma < 0.0) throw Error(ErrorCode::InvalidArgument, "noise_sigma must be >= 0");
}

double a_of_t(double t, const Forcing& f) {
  if (f.amplitude == 0.0) return f.a0;
  return f.a0 + f.amplitude * std::sin(f.omega * t);
}

double year_length(const ModelParams& p) { return 2.0 * std::numbers::pi / (kAnnualOmega * p.delta); }

std::array<std::complex<double>, 3> slow_time_eigenvalues(const EquilibriumInfo& eq, const ModelParams& p) {
  auto out = eq.eigenvalues;
  for (auto& l : out) l /= p.delta;
  return out;
}

Vec3 vector_field(const State& s, const ModelParams& p) {
  const double x = s[0], y = s[1], z = s[2];
  const double rd = p.rho * p.delta;
  return {rd * (x * x - p.a * x) + x * (x + y + p.c - p.c * std::tanh(x + z)),
          -rd * (p.a * y + x * x),
          p.delta * (p.k - z - 0.5 * x)};
}

Mat3 jacobian(const State& s, const ModelParams& p) {
  const double x = s[0], y = s[1], z = s[2];
  const double rd = p.rho * p.delta;
  const double th = std::tanh(x + z);
  const double sech2 = 1.0 - th * th;
  Mat3 j{};
  j[0][0] = rd * (2.0 * x - p.a) + (x + y + p.c - p.c * th) + x * (1.0 - p.c * sech2);
  j[0][1] = x;
  j[0][2] = -x * p.c * sech2;
  j[1][0] = -2.0 * rd * x;
  j[1][1] = -rd * p.a;
  j[1][2] = 0.0;
  j[2][0] = -0.5 * p.delta;
  j[2][1] = 0.0;
  j[2][2] = -p.delta;
  return j;
}

EquilibriumInfo find_equilibrium(const ModelParams& p, const State& guess,
                                 const NewtonOptions& opts) {
  p.validate();
  State s = guess;
  double residual = norm(vector_field(s, p));
  int it = 0;
  while (residual >= opts.tolerance) {
    if (it >= opts.max_iterations)
      throw Error(ErrorCode::NoConvergence,
                  "equilibrium Newton did not converge, residual " + std::to_string(residual));
    const Vec3 f = vector_field(s, p);
    Vec3 step{};
    if (!solve3(jacobian(s, p), f, step))
      throw Error(ErrorCode::SingularJacobian, "singular Jacobian during equilibrium Newton");
    s = s - step;
    if (!all_finite(s)) throw Error(ErrorCode::NoConvergence, "equilibrium Newton diverged");
    residual = norm(vector_field(s, p));
    ++it;
  }
  EquilibriumInfo eq;
  eq.state = s;
  eq.residual = residual;
  eq.iterations = it;
  equilibrium_eigenstructure(eq, p);
  return eq;
}

void equilibrium_eigenstructure(EquilibriumInfo& eq, const ModelParams& p) {
  const Mat3 j = jacobian(eq.state, p);
  eq.eigenvalues = eigenvalues(j);
  for (int i = 0; i < 3; ++i) {
    std::array<std::complex<double>, 3> v;
    if (!eigenvector(j, eq.eigenvalues[i], v))
      throw Error(ErrorCode::DefectiveMatrix, "eigenvector computation failed");
    // Normalize to unit length with the largest component real.
    std::size_t big = 0;
    for (std::size_t c = 1; c < 3; ++c)
      if (std::abs(v[c]) > std::abs(v[big])) big = c;
    const std::complex<double> phase = std::abs(v[big]) / v[big];
    double n = 0.0;
    for (auto& c : v) {
      c *= phase;
      n += std::norm(c);
    }
    n = std::sqrt(n);
    for (auto& c : v) c /= n;
    eq.eigenvectors[i] = v;
  }

  eq.saddle_focus = eq.eigenvalues[1].imag() != 0.0;
  Vec3 u{}, w{};
  if (eq.saddle_focus) {
    for (int c = 0; c < 3; ++c) {
      u[c] = eq.eigenvectors[1][c].real();
      w[c] = eq.eigenvectors[1][c].imag();
    }
  } else {
    // Three real eigenvalues: use the plane of the two largest.
    for (int c = 0; c < 3; ++c) {
      u[c] = eq.eigenvectors[1][c].real();
      w[c] = eq.eigenvectors[2][c].real();
    }
  }
  Vec3 normal = cross(u, w);
  const double nn = norm(normal);
  if (nn == 0.0) throw Error(ErrorCode::DefectiveMatrix, "eigenplane is degenerate");
  normal = (1.0 / nn) * normal;
  if (normal[2] < 0.0) normal = -1.0 * normal;
  eq.observable_direction = normal;

  // Orthonormal basis of the eigenplane (Gram–Schmidt).
  const Vec3 e1 = (1.0 / norm(u)) * u;
  Vec3 e2 = w - dot(w, e1) * e1;
  e2 = (1.0 / norm(e2)) * e2;
  eq.plane_u = e1;
  eq.plane_v = e2;
}

double growth_per_revolution(const EquilibriumInfo& eq) {
  if (!eq.saddle_focus) throw Error(ErrorCode::NotSaddleFocus, "equilibrium has no complex pair");
  const auto lam = eq.eigenvalues[1];
  return std::exp(2.0 * std::numbers::pi * lam.real() / std::abs(lam.imag()));
}

EquilibriumInfo saddle_focus(const ModelParams& p) {
  // Analytic seed: y and z are slaved to x by y' = z' = 0; refine x from the
  // reference guess.
  const double x = -2.5;
  return find_equilibrium(p, {x, -x * x / p.a, p.k - 0.5 * x});
}

}  // namespace jtenso
