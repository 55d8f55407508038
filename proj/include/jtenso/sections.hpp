#pragma once

// Poincaré sections of the JT flow: refined crossings, k-th returns,
// unstable-manifold seeding and quadratic curve fits on a section.

#include <functional>
#include <optional>
#include <vector>

#include "jtenso/integrator.hpp"
#include "jtenso/model.hpp"
#include "jtenso/variational.hpp"

namespace jtenso {

enum class Axis { X = 0, Y = 1, Z = 2 };
enum class Direction { Increasing, Decreasing, Both };

struct SectionSpec {
  Axis coordinate = Axis::X;
  double value = -1.5;
  Direction direction = Direction::Increasing;

  int index() const { return static_cast<int>(coordinate); }
  /// The two coordinates that parametrize the section plane, in order.
  std::array<int, 2> free_indices() const;
  Vec3 embed(double u, double v) const;
  void validate() const;
};

/// The x = −1.5 strong-event threshold section, crossed on the way out of
/// an event. The MMO fold and its fixed point live on this branch.
inline SectionSpec event_section() { return {Axis::X, -1.5, Direction::Decreasing}; }

struct Crossing {
  double t = 0.0;
  State state{};
  int direction = 0;  // +1 increasing, −1 decreasing
  double residual = 0.0;
};

/// Sign changes of (coordinate − value) over one dense segment, refined by
/// bisection on the interpolant until |residual| < tol.
template <std::size_t N>
void segment_crossings(const DenseSegment<N>& seg, int index, double value, Direction dir,
                       std::vector<double>& times, std::vector<int>& signs, double tol = 1e-10);

/// Streaming crossing detection over an accepted-step sequence.
class CrossingDetector {
 public:
  CrossingDetector(const SectionSpec& section, double tol = 1e-10) : section_(section), tol_(tol) {}

  template <std::size_t N>
  void feed(const DenseSegment<N>& seg, std::vector<Crossing>& out) const {
    times_.clear();
    signs_.clear();
    segment_crossings(seg, section_.index(), section_.value, section_.direction, times_, signs_, tol_);
    for (std::size_t i = 0; i < times_.size(); ++i) {
      const Vec<N> y = seg(times_[i]);
      Crossing c;
      c.t = times_[i];
      c.state = {y[0], y[1], y[2]};
      c.direction = signs_[i];
      c.residual = c.state[section_.index()] - section_.value;
      out.push_back(c);
    }
  }

  const SectionSpec& section() const { return section_; }

 private:
  SectionSpec section_;
  double tol_;
  mutable std::vector<double> times_;
  mutable std::vector<int> signs_;
};

struct CrossingOptions {
  double t_max = 1000.0;
  double t_start = 0.0;       // crossings before t_start are ignored
  std::size_t max_crossings = 0;  // 0 = unlimited
  /// Crossings at the very start of the run (within this time) are ignored
  /// so a point on the section does not report itself.
  double skip_initial = 1e-9;
};

std::vector<Crossing> detect_crossings(const JtField& field, const State& s0, const SectionSpec& section,
                                       const CrossingOptions& opts, const IntegratorConfig& cfg = {});

struct ReturnSample {
  State input{};
  State output{};
  double elapsed = 0.0;
};

struct ReturnOptions {
  int k = 1;
  /// Timeout per return in model time.
  double t_max_per_return = 400.0;
};

/// The k-th same-direction return of a point on the section. Throws
/// Error(NoReturn) on timeout and Error(InvalidArgument) for a point off the
/// section (residual ≥ 1e−8).
ReturnSample kth_return(const JtField& field, const State& point, const SectionSpec& section,
                        const ReturnOptions& opts = {}, const IntegratorConfig& cfg = {});

std::vector<std::optional<ReturnSample>> kth_returns(const JtField& field, const std::vector<State>& points,
                                                     const SectionSpec& section, const ReturnOptions& opts = {},
                                                     const IntegratorConfig& cfg = {}, int jobs = 1);

/// k-th return together with the derivative of the section map in the
/// section's free coordinates (2×2, row-major), from the variational flow
/// projected along the vector field onto the section.
struct ReturnWithJacobian {
  ReturnSample sample;
  std::array<double, 4> dmap{};
  Mat3 fundamental{};  // flow-map derivative over the elapsed time
};

ReturnWithJacobian kth_return_with_jacobian(const JtField& field, const State& point, const SectionSpec& section,
                                            const ReturnOptions& opts = {}, const IntegratorConfig& cfg = {});

/// n points on a circle of the given radius in the oscillatory eigenplane of
/// a saddle focus: eq + r·(cos θ·Re v − sin θ·Im v)/|Re v| for the complex
/// eigenvector v (a single linear-flow orbit per angle). Throws
/// Error(NotSaddleFocus).
std::vector<State> seed_unstable_manifold(const EquilibriumInfo& eq, double radius, int n_points);

/// First crossings of the section by the forward orbits of the seeds; seeds
/// that never cross within t_max are dropped.
std::vector<Crossing> manifold_section(const JtField& field, const std::vector<State>& seeds,
                                       const SectionSpec& section, double t_max,
                                       const IntegratorConfig& cfg = {}, int jobs = 1);

/// A quadratic curve on a section: dep = c0 + c1·ind + c2·ind², with ind
/// and dep two of the section's free coordinates.
struct PlaneCurve {
  SectionSpec section;
  int independent = 1;  // state index of the independent coordinate
  int dependent = 2;
  std::array<double, 3> coeff{};
  std::array<double, 3> std_error{};
  double ind_min = 0.0;
  double ind_max = 0.0;
  double rms = 0.0;
  std::size_t n_points = 0;

  double operator()(double ind) const { return coeff[0] + ind * (coeff[1] + ind * coeff[2]); }
  State point(double ind) const;
  /// Total arclength over [ind_min, ind_max].
  double length() const;
  /// n points uniformly spaced in arclength.
  std::vector<State> sample(int n) const;
};

/// Least-squares quadratic through section points. The independent
/// coordinate is the free coordinate with the larger spread unless given.
/// Throws Error(DegenerateGeometry) with fewer than three distinct
/// independent values, or when all points share the same independent value.
PlaneCurve fit_quadratic(const std::vector<State>& points, const SectionSpec& section,
                         std::optional<int> independent = std::nullopt);

struct MapSample {
  double z_in = 0.0;
  double z_ret = 0.0;
  State input{};
  State output{};
  double elapsed = 0.0;
};

/// z-coordinate of the first return for n points sampled along the curve.
/// Samples that do not return are omitted.
std::vector<MapSample> approx_1d_return_map(const JtField& field, const PlaneCurve& curve, int n_samples,
                                            const ReturnOptions& opts = {}, const IntegratorConfig& cfg = {},
                                            int jobs = 1);

/// Polyline length through consecutive points.
double polyline_length(const std::vector<State>& pts);

}  // namespace jtenso
