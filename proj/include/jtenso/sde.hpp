#pragma once

// Fixed-step Euler–Maruyama for additive noise:
//   s_{n+1} = s_n + dt·f(t_n, s_n) + sigma ⊙ sqrt(dt)·ξ_n,  ξ_n ~ N(0, I).

#include <cstdint>
#include <random>

#include "jtenso/integrator.hpp"

namespace jtenso {

struct NoisePlan {
  Vec3 sigma{0.0, 0.0, 0.0};
  double dt = 0.01;
  std::uint64_t seed = 0;
  /// Store every n-th step (the final state is always stored).
  long store_every = 1;

  static NoisePlan isotropic(double s, double dt, std::uint64_t seed) {
    return {{s, s, s}, dt, seed, 1};
  }

  void validate() const {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise plan dt must be positive");
    for (double s : sigma)
      if (!(s >= 0.0) || !std::isfinite(s))
        throw Error(ErrorCode::InvalidArgument, "noise sigma must be finite and >= 0");
    if (store_every < 1) throw Error(ErrorCode::InvalidArgument, "store_every must be >= 1");
  }
};

/// Mixes a run seed with a task index so parallel paths get independent
/// streams (splitmix64 finalizer).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t task) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (task + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Standard normal variates from a 64-bit Mersenne Twister via Box–Muller.
/// Implemented here rather than with std::normal_distribution so paths are
/// identical across standard-library implementations.
class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    constexpr double two_pi = 6.283185307179586476925286766559;
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(two_pi * u2);
    has_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

 private:
  double uniform_open() {
    // 53 random bits mapped into (0, 1).
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

template <class Field>
Trajectory<3> integrate_sde(Field field, const Vec3& s0, double t0, double t1,
                            const NoisePlan& plan) {
  plan.validate();
  if (!all_finite(s0)) throw Error(ErrorCode::NonFiniteState, "non-finite initial state");
  GaussianSource normal(plan.seed);
  const double sq = std::sqrt(plan.dt);
  const bool noisy = plan.sigma[0] != 0.0 || plan.sigma[1] != 0.0 || plan.sigma[2] != 0.0;

  Trajectory<3> traj;
  traj.times.push_back(t0);
  traj.states.push_back(s0);
  Vec3 s = s0;
  const auto n = static_cast<long>(std::ceil((t1 - t0) / plan.dt - 1e-9));
  for (long i = 0; i < n; ++i) {
    const double t = t0 + i * plan.dt;
    const double h = (i == n - 1) ? (t1 - t) : plan.dt;
    const Vec3 f = field(t, s);
    for (int c = 0; c < 3; ++c) {
      s[c] += h * f[c];
      if (noisy) s[c] += plan.sigma[c] * (h == plan.dt ? sq : std::sqrt(h)) * normal();
    }
    if (!all_finite(s))
      throw Error(ErrorCode::NonFiniteState, "stochastic path became non-finite at t = " + std::to_string(t));
    if ((i + 1) % plan.store_every == 0 || i == n - 1) {
      traj.times.push_back(i == n - 1 ? t1 : t0 + (i + 1) * plan.dt);
      traj.states.push_back(s);
    }
  }
  return traj;
}

}  // namespace jtenso
