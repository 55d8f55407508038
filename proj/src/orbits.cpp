#include "jtenso/orbits.hpp"

#include <algorithm>
#include <cmath>

#include "jtenso/error.hpp"

namespace jtenso {

const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Saddle: return "saddle";
    case Stability::Unstable: return "unstable";
  }
  return "unknown";
}

Classification classify(const std::array<std::complex<double>, 2>& multipliers) {
  int inside = 0;
  for (const auto& m : multipliers)
    if (std::abs(m) < 1.0) ++inside;
  Classification c;
  c.stability = inside == 2 ? Stability::Stable : inside == 0 ? Stability::Unstable : Stability::Saddle;
  const auto& dominant = std::abs(multipliers[0]) >= std::abs(multipliers[1]) ? multipliers[0] : multipliers[1];
  c.orientable = !(dominant.imag() == 0.0 && dominant.real() < 0.0);
  return c;
}

namespace {

void set_multipliers(PeriodicOrbit& orbit, const std::array<double, 4>& dmap) {
  auto mu = eigenvalues2(dmap[0], dmap[1], dmap[2], dmap[3]);
  orbit.rank_deficient = false;
  for (auto& m : mu) {
    if (std::abs(m) < kRankDeficientMultiplier) {
      m = 0.0;
      orbit.rank_deficient = true;
    }
  }
  orbit.multipliers = mu;
  orbit.classification = classify(mu);
}

}  // namespace

PeriodicOrbit newton_periodic(const JtField& field, const SectionSpec& section, int k, const State& guess,
                              const NewtonPeriodicOptions& opts, const IntegratorConfig& cfg) {
  ReturnOptions ret = opts.returns;
  ret.k = k;
  const auto fi = section.free_indices();
  State q = guess;
  q[section.index()] = section.value;

  PeriodicOrbit orbit;
  orbit.section = section;
  orbit.k = k;
  for (int it = 0; it <= opts.max_iterations; ++it) {
    const auto r = kth_return_with_jacobian(field, q, section, ret, cfg);
    const double g0 = r.sample.output[fi[0]] - q[fi[0]];
    const double g1 = r.sample.output[fi[1]] - q[fi[1]];
    const double residual = std::hypot(g0, g1);
    orbit.residual_history.push_back(residual);
    if (residual < opts.tolerance) {
      orbit.section_point = q;
      orbit.period = r.sample.elapsed;
      orbit.iterations = it;
      set_multipliers(orbit, r.dmap);
      return orbit;
    }
    if (it == opts.max_iterations) break;
    // (DF − I)·Δ = −G
    const double a = r.dmap[0] - 1.0, b = r.dmap[1], c = r.dmap[2], d = r.dmap[3] - 1.0;
    const double det2 = a * d - b * c;
    const double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    if (std::abs(det2) <= 1e-14 * scale * scale)
      throw Error(ErrorCode::SingularJacobian, "section map Newton system is singular");
    const double d0 = (-g0 * d + b * g1) / det2;
    const double d1 = (-a * g1 + c * g0) / det2;
    q[fi[0]] += d0;
    q[fi[1]] += d1;
    if (!all_finite(q)) throw Error(ErrorCode::NoConvergence, "periodic-orbit Newton diverged");
  }
  throw Error(ErrorCode::NoConvergence,
              "periodic-orbit Newton did not converge, residual " + std::to_string(orbit.residual_history.back()));
}

std::array<std::complex<double>, 2> MonodromyResult::nontrivial() const {
  std::array<std::complex<double>, 2> out;
  int j = 0;
  for (int i = 0; i < 3; ++i)
    if (i != trivial_index) out[j++] = multipliers[i];
  if (std::abs(out[1]) > std::abs(out[0])) std::swap(out[0], out[1]);
  return out;
}

double integrated_trace(const JtField& field, const State& s0, double T, const IntegratorConfig& cfg, double t0) {
  // 5-point Gauss–Legendre on each step's interpolant.
  static constexpr double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                      0.9061798459386640};
  static constexpr double weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                        0.4786286704993665, 0.2369268850561891};
  double total = 0.0;
  integrate_steps<3>(field, s0, t0, t0 + T, cfg, [&](const DenseSegment<3>& seg) {
    double acc = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double t = seg.t0 + 0.5 * seg.h * (nodes[i] + 1.0);
      acc += weights[i] * trace(field.jacobian_at(t, seg(t)));
    }
    total += 0.5 * seg.h * acc;
    return true;
  });
  return total;
}

MonodromyResult monodromy(const JtField& field, const PeriodicOrbit& orbit, const IntegratorConfig& cfg,
                          double segment_length) {
  if (!(segment_length > 0.0)) throw Error(ErrorCode::InvalidArgument, "segment_length must be positive");
  MonodromyResult out;
  Mat3 m = identity3();
  State s = orbit.section_point;
  double log_det = 0.0, total_trace = 0.0;
  const int n = std::max(1, static_cast<int>(std::ceil(orbit.period / segment_length)));
  const double h = orbit.period / n;
  for (int i = 0; i < n; ++i) {
    const double t0 = i * h;
    const auto [next, seg] = flow_with_tangent(field, s, t0, t0 + h, cfg);
    const double tr = integrated_trace(field, s, h, cfg, t0);
    const double d = det(seg);
    out.max_segment_liouville_error =
        std::max(out.max_segment_liouville_error, std::abs(d - std::exp(tr)) / std::exp(tr));
    log_det += std::log(std::abs(d));
    total_trace += tr;
    m = seg * m;
    s = next;
  }
  out.segments = n;
  out.matrix = m;
  out.multipliers = eigenvalues(m);
  double best = 1e300;
  for (int i = 0; i < 3; ++i) {
    const double d = std::abs(out.multipliers[i] - 1.0);
    if (d < best) {
      best = d;
      out.trivial_index = i;
    }
  }
  out.det = std::exp(log_det);
  out.liouville_det = std::exp(total_trace);
  return out;
}

}  // namespace jtenso
