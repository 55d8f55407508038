#pragma once

// Dormand–Prince 5(4) with PI step-size control and Hairer's 4th-order
// continuous extension.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "jtenso/error.hpp"
#include "jtenso/linalg.hpp"

namespace jtenso {

struct IntegratorConfig {
  double rtol = 1e-9;
  double atol = 1e-11;
  double max_step = 1.0;
  double initial_step = 0.0;  // 0 selects the step automatically
  long max_steps = 100'000'000;

  void validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0))
      throw Error(ErrorCode::InvalidArgument, "rtol and atol must be positive");
    if (!(max_step > 0.0)) throw Error(ErrorCode::InvalidArgument, "max_step must be positive");
    if (initial_step < 0.0) throw Error(ErrorCode::InvalidArgument, "initial_step must be >= 0");
  }

  IntegratorConfig tightened(double factor) const {
    IntegratorConfig c = *this;
    c.rtol /= factor;
    c.atol /= factor;
    return c;
  }
};

/// Continuous interpolant over one accepted step [t0, t0 + h].
template <std::size_t N>
struct DenseSegment {
  double t0 = 0.0;
  double h = 0.0;
  std::array<Vec<N>, 5> coeff{};

  double t1() const { return t0 + h; }

  Vec<N> operator()(double t) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    Vec<N> y;
    for (std::size_t i = 0; i < N; ++i)
      y[i] = coeff[0][i] +
             th * (coeff[1][i] + th1 * (coeff[2][i] + th * (coeff[3][i] + th1 * coeff[4][i])));
    return y;
  }

  double component(double t, std::size_t i) const {
    const double th = (t - t0) / h;
    const double th1 = 1.0 - th;
    return coeff[0][i] +
           th * (coeff[1][i] + th1 * (coeff[2][i] + th * (coeff[3][i] + th1 * coeff[4][i])));
  }

  Vec<N> start() const { return coeff[0]; }
  Vec<N> end() const { return coeff[0] + coeff[1]; }
};

namespace dp5 {
inline constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
inline constexpr double a21 = 0.2;
inline constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
inline constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
inline constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                        a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
inline constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
inline constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                        a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
inline constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                        e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
inline constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
}  // namespace dp5

/// Adaptive stepper; each call to step() performs one accepted step and
/// exposes its dense interpolant. Field: Vec<N>(double t, const Vec<N>&).
template <std::size_t N, class Field>
class Dopri5 {
 public:
  Dopri5(Field field, double t0, const Vec<N>& y0, const IntegratorConfig& cfg)
      : field_(std::move(field)), cfg_(cfg), t_(t0), y_(y0) {
    cfg_.validate();
    if (!all_finite(y0) || !std::isfinite(t0))
      throw Error(ErrorCode::NonFiniteState, "non-finite initial state");
    k1_ = field_(t_, y_);
    h_ = cfg_.initial_step;
  }

  double t() const { return t_; }
  const Vec<N>& y() const { return y_; }
  const DenseSegment<N>& segment() const { return seg_; }
  long accepted() const { return accepted_; }
  long rejected() const { return rejected_; }

  /// One accepted step in the direction of t_end, never stepping past it.
  /// Returns false when t already equals t_end.
  bool step(double t_end) {
    const double span = t_end - t_;
    if (span == 0.0) return false;
    const double dir = span > 0.0 ? 1.0 : -1.0;
    if (h_ == 0.0) h_ = initial_step_guess(dir);
    double h = dir * std::min({std::abs(h_), cfg_.max_step});

    using namespace dp5;
    for (;;) {
      if (++steps_ > cfg_.max_steps)
        throw Error(ErrorCode::StepSizeUnderflow, "maximum number of steps exceeded");
      bool last = false;
      if ((t_ + h - t_end) * dir >= 0.0) {
        h = t_end - t_;
        last = true;
      }
      if (std::abs(h) <= 16.0 * std::numeric_limits<double>::epsilon() *
                             std::max(1.0, std::abs(t_)))
        throw Error(ErrorCode::StepSizeUnderflow, "step size underflow at t = " + std::to_string(t_));

      Vec<N> yt;
      for (std::size_t i = 0; i < N; ++i) yt[i] = y_[i] + h * a21 * k1_[i];
      const Vec<N> k2 = field_(t_ + c2 * h, yt);
      for (std::size_t i = 0; i < N; ++i) yt[i] = y_[i] + h * (a31 * k1_[i] + a32 * k2[i]);
      const Vec<N> k3 = field_(t_ + c3 * h, yt);
      for (std::size_t i = 0; i < N; ++i)
        yt[i] = y_[i] + h * (a41 * k1_[i] + a42 * k2[i] + a43 * k3[i]);
      const Vec<N> k4 = field_(t_ + c4 * h, yt);
      for (std::size_t i = 0; i < N; ++i)
        yt[i] = y_[i] + h * (a51 * k1_[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      const Vec<N> k5 = field_(t_ + c5 * h, yt);
      for (std::size_t i = 0; i < N; ++i)
        yt[i] = y_[i] + h * (a61 * k1_[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
      const Vec<N> k6 = field_(t_ + h, yt);
      Vec<N> y1;
      for (std::size_t i = 0; i < N; ++i)
        y1[i] = y_[i] + h * (a71 * k1_[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
      const Vec<N> k7 = field_(t_ + h, y1);

      double err = 0.0;
      bool finite = true;
      for (std::size_t i = 0; i < N; ++i) {
        const double sk = cfg_.atol + cfg_.rtol * std::max(std::abs(y_[i]), std::abs(y1[i]));
        const double e = h * (e1 * k1_[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                              e7 * k7[i]) / sk;
        err += e * e;
        finite = finite && std::isfinite(y1[i]);
      }
      err = std::sqrt(err / N);
      if (!finite || !std::isfinite(err)) {
        // Retry smaller; a genuinely divergent solution ends in underflow.
        h *= 0.1;
        ++rejected_;
        if (!all_finite(y_)) throw Error(ErrorCode::NonFiniteState, "non-finite state");
        continue;
      }

      // PI controller (Hairer's DOPRI5 settings).
      constexpr double safe = 0.9, facl = 0.2, facr = 10.0, beta = 0.04, expo = 0.2 - beta * 0.75;
      const double fac11 = std::pow(err, expo);
      double fac = fac11 / std::pow(err_old_, beta);
      fac = std::clamp(fac / safe, 1.0 / facr, 1.0 / facl);
      double h_new = h / fac;

      if (err <= 1.0) {
        err_old_ = std::max(err, 1e-4);
        if (rejected_last_) h_new = dir * std::min(std::abs(h_new), std::abs(h));
        rejected_last_ = false;

        seg_.t0 = t_;
        seg_.h = h;
        for (std::size_t i = 0; i < N; ++i) {
          const double ydiff = y1[i] - y_[i];
          const double bspl = h * k1_[i] - ydiff;
          seg_.coeff[0][i] = y_[i];
          seg_.coeff[1][i] = ydiff;
          seg_.coeff[2][i] = bspl;
          seg_.coeff[3][i] = ydiff - h * k7[i] - bspl;
          seg_.coeff[4][i] =
              h * (d1 * k1_[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
        t_ = last ? t_end : t_ + h;
        y_ = y1;
        k1_ = k7;
        ++accepted_;
        // Keep the controller's step when the last step was truncated to
        // hit t_end.
        if (!last) h_ = h_new;
        return true;
      }
      h_new = h / std::min(1.0 / facl, fac11 / safe);
      rejected_last_ = true;
      ++rejected_;
      h = h_new;
    }
  }

 private:
  double initial_step_guess(double dir) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = cfg_.atol + cfg_.rtol * std::abs(y_[i]);
      dnf += (k1_[i] / sk) * (k1_[i] / sk);
      dny += (y_[i] / sk) * (y_[i] / sk);
    }
    double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * std::sqrt(dny / dnf);
    h = std::min(h, cfg_.max_step);
    Vec<N> y1;
    for (std::size_t i = 0; i < N; ++i) y1[i] = y_[i] + dir * h * k1_[i];
    const Vec<N> k2 = field_(t_ + dir * h, y1);
    double der2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sk = cfg_.atol + cfg_.rtol * std::abs(y_[i]);
      der2 += ((k2[i] - k1_[i]) / sk) * ((k2[i] - k1_[i]) / sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(std::abs(der2), std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, std::abs(h) * 1e-3)
                                     : std::pow(0.01 / der12, 0.2);
    return dir * std::min({100.0 * h, h1, cfg_.max_step});
  }

  Field field_;
  IntegratorConfig cfg_;
  double t_;
  Vec<N> y_;
  Vec<N> k1_{};
  double h_ = 0.0;
  double err_old_ = 1e-4;
  bool rejected_last_ = false;
  long accepted_ = 0;
  long rejected_ = 0;
  long steps_ = 0;
  DenseSegment<N> seg_{};
};

/// Stored solution: states at every accepted step plus the step
/// interpolants. Times are strictly increasing.
template <std::size_t N>
struct Trajectory {
  std::vector<double> times;
  std::vector<Vec<N>> states;
  std::vector<DenseSegment<N>> segments;  // segments[i] spans [times[i], times[i+1]]

  std::size_t size() const { return times.size(); }
  double t_begin() const { return times.front(); }
  double t_end() const { return times.back(); }

  /// Dense evaluation; falls back to linear interpolation for trajectories
  /// without interpolants (fixed-step stochastic paths).
  Vec<N> at(double t) const {
    if (t <= times.front()) return states.front();
    if (t >= times.back()) return states.back();
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times.begin()) - 1;
    if (!segments.empty()) return segments[i](t);
    const double w = (t - times[i]) / (times[i + 1] - times[i]);
    return (1.0 - w) * states[i] + w * states[i + 1];
  }

  /// Samples on the uniform grid t_begin + n·dt.
  Trajectory<N> resampled(double dt) const {
    Trajectory<N> out;
    const double t0 = t_begin();
    const auto n = static_cast<long>(std::floor((t_end() - t0) / dt + 1e-9));
    out.times.reserve(n + 1);
    out.states.reserve(n + 1);
    for (long i = 0; i <= n; ++i) {
      const double t = t0 + i * dt;
      out.times.push_back(t);
      out.states.push_back(at(t));
    }
    return out;
  }
};

/// Calls on_step(segment) after every accepted step; stops early when it
/// returns false. Returns the final stepper state time.
template <std::size_t N, class Field, class OnStep>
double integrate_steps(Field field, const Vec<N>& s0, double t0, double t1,
                       const IntegratorConfig& cfg, OnStep&& on_step, Vec<N>* final_state = nullptr) {
  Dopri5<N, Field> solver(std::move(field), t0, s0, cfg);
  while (solver.step(t1)) {
    if (!on_step(solver.segment())) break;
  }
  if (final_state) *final_state = solver.y();
  return solver.t();
}

template <std::size_t N, class Field>
Trajectory<N> integrate(Field field, const Vec<N>& s0, double t0, double t1,
                        const IntegratorConfig& cfg = {}) {
  Trajectory<N> traj;
  traj.times.push_back(t0);
  traj.states.push_back(s0);
  integrate_steps<N>(std::move(field), s0, t0, t1, cfg, [&](const DenseSegment<N>& seg) {
    traj.times.push_back(seg.t1());
    traj.states.push_back(seg.end());
    traj.segments.push_back(seg);
    return true;
  });
  // The stepper snaps the last step onto t1 exactly.
  if (!traj.segments.empty()) traj.times.back() = t1;
  return traj;
}

/// Final state only.
template <std::size_t N, class Field>
Vec<N> flow(Field field, const Vec<N>& s0, double t0, double t1, const IntegratorConfig& cfg = {}) {
  Vec<N> out = s0;
  integrate_steps<N>(std::move(field), s0, t0, t1, cfg, [](const DenseSegment<N>&) { return true; },
                     &out);
  return out;
}

}  // namespace jtenso
