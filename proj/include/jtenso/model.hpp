#pragma once

// The dimensionless three-variable ENSO recharge-oscillator vector field
//
//   x' = ρδ(x² − a·x) + x(x + y + c − c·tanh(x + z))
//   y' = −ρδ(a·y + x²)
//   z' = δ(k − z − x/2)
//
// x: east–west SST difference, y: western SST anomaly, z: western
// thermocline depth.

#include <array>
#include <complex>
#include <cstdint>

#include "jtenso/linalg.hpp"

namespace jtenso {

using State = Vec3;

struct ModelParams {
  double delta = 0.225423;
  double rho = 0.3224;
  double c = 2.3952;
  double k = 0.4032;
  double a = 7.3939;

  /// The bistable parameter set studied throughout the toolkit.
  static constexpr ModelParams reference() { return {}; }

  /// Throws Error(InvalidArgument) unless all fields are finite and
  /// delta, rho are positive.
  void validate() const;

  ModelParams with_a(double value) const {
    ModelParams p = *this;
    p.a = value;
    return p;
  }
  ModelParams with_delta(double value) const {
    ModelParams p = *this;
    p.delta = value;
    return p;
  }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Time dependence of a: a(t) = a0 + amplitude·sin(omega·t), plus optional
/// additive white noise of scale noise_sigma on every state component.
struct Forcing {
  double a0 = 7.3939;
  double amplitude = 0.0;
  double omega = 1.8;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool is_autonomous() const { return amplitude == 0.0 && noise_sigma == 0.0; }

  friend bool operator==(const Forcing&, const Forcing&) = default;
};

double a_of_t(double t, const Forcing& f);

/// The forcing clock and the eigenvalues quoted for this model run on the
/// slow time τ = δ·t. One year is one period of the annual cycle, whose
/// angular frequency on the τ clock is kAnnualOmega.
inline constexpr double kAnnualOmega = 1.8;

/// Length of one year in model-time units.
double year_length(const ModelParams& p);
inline double to_years(double model_time, const ModelParams& p) { return model_time / year_length(p); }
inline double from_years(double years, const ModelParams& p) { return years * year_length(p); }

Vec3 vector_field(const State& s, const ModelParams& p);
Mat3 jacobian(const State& s, const ModelParams& p);

/// Vector field as a callable of (t, s); when forced, a is replaced by
/// a_of_t(δ·t).
class JtField {
 public:
  explicit JtField(const ModelParams& p) : p_(p) {}
  JtField(const ModelParams& p, const Forcing& f) : p_(p), forcing_(f), forced_(f.amplitude != 0.0) {
    p_.a = f.a0;
  }

  Vec3 operator()(double t, const State& s) const {
    if (!forced_) return vector_field(s, p_);
    ModelParams q = p_;
    q.a = a_of_t(p_.delta * t, forcing_);
    return vector_field(s, q);
  }

  Mat3 jacobian_at(double t, const State& s) const {
    if (!forced_) return jacobian(s, p_);
    ModelParams q = p_;
    q.a = a_of_t(p_.delta * t, forcing_);
    return jacobian(s, q);
  }

  const ModelParams& params() const { return p_; }
  const Forcing& forcing() const { return forcing_; }
  bool forced() const { return forced_; }

 private:
  ModelParams p_;
  Forcing forcing_{};
  bool forced_ = false;
};

struct EquilibriumInfo {
  State state{};
  /// Real eigenvalues first (ascending), then a complex pair with the
  /// positive-imaginary member first.
  std::array<std::complex<double>, 3> eigenvalues{};
  std::array<std::array<std::complex<double>, 3>, 3> eigenvectors{};
  bool saddle_focus = false;
  /// Unit normal of the complex eigenplane, z-component positive.
  Vec3 observable_direction{};
  /// Real and imaginary parts of the complex eigenvector, orthonormalized
  /// (both span the oscillatory eigenplane).
  Vec3 plane_u{};
  Vec3 plane_v{};
  double residual = 0.0;
  int iterations = 0;
};

struct NewtonOptions {
  int max_iterations = 50;
  double tolerance = 1e-12;
};

/// Newton iteration on the vector field from `guess`. Throws
/// Error(NoConvergence) or Error(SingularJacobian).
EquilibriumInfo find_equilibrium(const ModelParams& p, const State& guess,
                                 const NewtonOptions& opts = {});

/// Eigenvalues, eigenvectors and observable direction of the Jacobian at a
/// converged equilibrium. Throws Error(DefectiveMatrix) when an eigenvector
/// cannot be formed.
void equilibrium_eigenstructure(EquilibriumInfo& eq, const ModelParams& p);

/// Eigenvalues on the slow-time clock (model-time eigenvalues divided by δ).
std::array<std::complex<double>, 3> slow_time_eigenvalues(const EquilibriumInfo& eq, const ModelParams& p);

/// Radial growth per revolution on the oscillatory eigenplane:
/// exp(2π·Re λ / Im λ).
double growth_per_revolution(const EquilibriumInfo& eq);

/// The saddle focus of the reference bistable regime, located from a guess
/// near (−2.5, −0.8, 1.6).
EquilibriumInfo saddle_focus(const ModelParams& p);

}  // namespace jtenso
