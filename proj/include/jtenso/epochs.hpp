#pragma once

// Mode switching under weak forcing: the observable g = d·s, its downward
// threshold crossings, and chaotic/MMO epochs bracketed by them.

#include <optional>
#include <utility>
#include <vector>

#include "jtenso/integrator.hpp"
#include "jtenso/model.hpp"
#include "jtenso/stats.hpp"

namespace jtenso {

inline constexpr double kUpperThreshold = 1.306;
inline constexpr double kLowerThreshold = 1.22;

struct ObservableSeries {
  std::vector<double> t;
  std::vector<double> g;
};

/// g at every stored sample of the trajectory; times are copied unchanged.
ObservableSeries observable_series(const Trajectory<3>& traj, const Vec3& direction);

struct ThresholdCrossings {
  double hi_level = kUpperThreshold;
  double lo_level = kLowerThreshold;
  std::vector<double> hi;  // times g falls through hi_level
  std::vector<double> lo;  // times g falls through lo_level
};

/// Downward crossings, located by linear interpolation between samples.
/// Throws Error(InvalidArgument) unless hi > lo.
ThresholdCrossings downward_crossings(const ObservableSeries& series, double hi = kUpperThreshold,
                                      double lo = kLowerThreshold);

/// Streaming form of downward_crossings for long runs.
class CrossingTracker {
 public:
  CrossingTracker(double hi, double lo);
  void add(double t, double g);
  const ThresholdCrossings& crossings() const { return out_; }

 private:
  ThresholdCrossings out_;
  bool has_prev_ = false;
  double t_prev_ = 0.0, g_prev_ = 0.0;
};

enum class EpochKind { Chaotic, MMO };

const char* to_string(EpochKind k);

struct Epoch {
  EpochKind kind = EpochKind::MMO;
  double start = 0.0;
  double end = 0.0;
  double duration() const { return end - start; }
};

/// A chaotic epoch runs from an upper-threshold crossing to the next
/// lower-threshold crossing when they are more than min_gap apart; the
/// gaps between chaotic epochs are MMO epochs. Epochs tile [span_start,
/// span_end]. With allow_empty false, throws Error(NoEpochs) when no pair
/// qualifies.
std::vector<Epoch> segment_epochs(const ThresholdCrossings& c, double span_start, double span_end,
                                  double min_gap = 15.0, bool allow_empty = true);

struct EpochStatistics {
  Histogram histogram;                              // durations < cutoff
  std::vector<std::pair<double, double>> pairs;     // (d_i, d_{i+1})
  double rank_correlation = 0.0;
  std::size_t chaotic = 0, mmo = 0;
  double longest = 0.0;
};

/// Durations exclude the two epochs cut by the ends of the span, which are
/// censored.
EpochStatistics epoch_statistics(const std::vector<Epoch>& epochs, double bin_width = 10.0, double cutoff = 400.0,
                                 bool drop_boundary_epochs = true);

struct ForcedRunOptions {
  double years = 2e4;
  /// g is sampled every sample_dt model-time units.
  double sample_dt = 0.02;
  /// Keep every n-th g sample for export (0 keeps none).
  long store_every = 50;
  double hi = kUpperThreshold;
  double lo = kLowerThreshold;
  /// Euler–Maruyama step when forcing.noise_sigma > 0.
  double noise_dt = 0.01;
};

struct ForcedRun {
  ModelParams params;
  Forcing forcing;
  Vec3 direction{};
  double span_years = 0.0;
  /// Crossing times and stored series times are in years.
  ThresholdCrossings crossings;
  ObservableSeries series;
  State final_state{};
};

/// Integrates the forced model from s0 for opts.years and tracks g along
/// the way. The observable direction comes from the equilibrium at a0.
ForcedRun forced_run(const ModelParams& p, const Forcing& f, const State& s0, const ForcedRunOptions& opts = {},
                     const IntegratorConfig& cfg = {});

}  // namespace jtenso
