#pragma once

// The odd cubic interval map g(x) = α·x·(1 − x²) and the statistics of its
// constant-sign epochs.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "jtenso/stats.hpp"

namespace jtenso {

inline double cubic_map(double x, double alpha) { return alpha * x * (1.0 - x * x); }

/// For alpha above this value the two one-sided attractors merge.
inline const double kCubicMergeAlpha = 1.5 * std::sqrt(3.0);

struct MapNoise {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct MapOrbit {
  double alpha = 0.0;
  double x0 = 0.0;
  std::optional<MapNoise> noise;
  std::vector<double> values;  // values[0] = x0, n + 1 entries
};

/// n iterates of g from x0; with noise, sigma·ξ (standard normal) is added
/// after every application of g.
MapOrbit iterate(double x0, long n, double alpha, std::optional<MapNoise> noise = std::nullopt);

struct EpochRecord {
  long start_index = 0;
  long length = 0;
  int sign = 0;
};

/// Maximal constant-sign runs of the orbit. An exact zero at index 0 is
/// skipped; anywhere else it throws Error(ZeroIterate).
std::vector<EpochRecord> epochs_by_sign(const MapOrbit& orbit);

std::vector<double> epoch_lengths(const std::vector<EpochRecord>& epochs);

/// Histogram of epoch lengths with a natural-log linear fit over the
/// occupied bins. Bins start at length 1.
Histogram epoch_histogram(const std::vector<EpochRecord>& epochs, double bin_width = 1.0);

struct PairCoverage {
  std::map<std::pair<long, long>, long> counts;  // (m, n) → occurrences
  long lo = 0;
  long hi = 0;
  /// Fraction of the (hi − lo + 1)² grid observed at least once.
  double coverage = 0.0;
};

/// Successive-length pairs (m, n) with lo ≤ m, n ≤ hi.
PairCoverage pair_coverage(const std::vector<EpochRecord>& epochs, long lo, long hi);

}  // namespace jtenso
