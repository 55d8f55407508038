#pragma once

// Periodic orbits located as fixed points of k-th return maps, with Floquet
// multipliers from the section map and from the monodromy matrix.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "jtenso/sections.hpp"

namespace jtenso {

enum class Stability { Stable, Saddle, Unstable };

const char* to_string(Stability s);

struct Classification {
  Stability stability = Stability::Stable;
  bool orientable = true;
};

/// Multipliers below this magnitude are reported as exactly zero and flag
/// the section map as numerically rank deficient.
inline constexpr double kRankDeficientMultiplier = 1e-10;

struct PeriodicOrbit {
  SectionSpec section;
  int k = 1;
  State section_point{};
  double period = 0.0;
  /// Eigenvalues of the k-th return map derivative, descending modulus.
  std::array<std::complex<double>, 2> multipliers{};
  bool rank_deficient = false;
  Classification classification;
  int iterations = 0;
  std::vector<double> residual_history;
};

struct NewtonPeriodicOptions {
  int max_iterations = 30;
  double tolerance = 1e-9;
  ReturnOptions returns{};
};

/// Newton on F_k(q) − q in the section's free coordinates, with the
/// Jacobian from the variational flow. Throws Error(NoConvergence),
/// Error(SingularJacobian) or Error(NoReturn).
PeriodicOrbit newton_periodic(const JtField& field, const SectionSpec& section, int k, const State& guess,
                              const NewtonPeriodicOptions& opts = {}, const IntegratorConfig& cfg = {});

struct MonodromyResult {
  Mat3 matrix{};
  std::array<std::complex<double>, 3> multipliers{};
  /// Index of the multiplier closest to 1 (flow direction).
  int trivial_index = 0;
  /// exp(∮ trace J dt) from quadrature along the orbit.
  double liouville_det = 0.0;
  /// det of the monodromy accumulated as the product of per-segment
  /// determinants. The direct det of the product loses everything to
  /// roundoff once the orbit contracts volume by more than ~1e−14.
  double det = 0.0;
  /// Largest relative Liouville mismatch over the segments.
  double max_segment_liouville_error = 0.0;
  int segments = 0;

  std::array<std::complex<double>, 2> nontrivial() const;
};

/// Fundamental matrix over one period, built from variational segments of
/// at most segment_length model-time units.
MonodromyResult monodromy(const JtField& field, const PeriodicOrbit& orbit, const IntegratorConfig& cfg = {},
                          double segment_length = 5.0);

/// Stable when every nontrivial |μ| < 1, unstable when every |μ| > 1,
/// saddle otherwise; non-orientable when the dominant multiplier is real
/// and negative.
Classification classify(const std::array<std::complex<double>, 2>& multipliers);

/// ∫ trace J along the trajectory over [0, T] by Gauss–Legendre quadrature
/// on the dense output of every accepted step.
double integrated_trace(const JtField& field, const State& s0, double T, const IntegratorConfig& cfg = {},
                        double t0 = 0.0);

}  // namespace jtenso
