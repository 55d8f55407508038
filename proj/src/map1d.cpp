#include "jtenso/map1d.hpp"

#include <cmath>

#include "jtenso/error.hpp"
#include "jtenso/sde.hpp"

namespace jtenso {

MapOrbit iterate(double x0, long n, double alpha, std::optional<MapNoise> noise) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "iterate: n must be >= 1");
  if (!std::isfinite(x0) || !std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "iterate: non-finite input");
  MapOrbit orbit{alpha, x0, noise, {}};
  orbit.values.reserve(static_cast<std::size_t>(n) + 1);
  orbit.values.push_back(x0);
  double x = x0;
  if (noise && noise->sigma != 0.0) {
    GaussianSource normal(noise->seed);
    for (long i = 0; i < n; ++i) {
      x = cubic_map(x, alpha) + noise->sigma * normal();
      orbit.values.push_back(x);
    }
  } else {
    for (long i = 0; i < n; ++i) {
      x = cubic_map(x, alpha);
      orbit.values.push_back(x);
    }
  }
  return orbit;
}

std::vector<EpochRecord> epochs_by_sign(const MapOrbit& orbit) {
  std::vector<EpochRecord> out;
  const auto& v = orbit.values;
  std::size_t i = (!v.empty() && v[0] == 0.0) ? 1 : 0;
  for (; i < v.size(); ++i) {
    if (v[i] == 0.0) throw Error(ErrorCode::ZeroIterate, "orbit hit 0 at index " + std::to_string(i));
    const int s = v[i] > 0.0 ? 1 : -1;
    if (!out.empty() && out.back().sign == s) {
      ++out.back().length;
    } else {
      out.push_back({static_cast<long>(i), 1, s});
    }
  }
  return out;
}

std::vector<double> epoch_lengths(const std::vector<EpochRecord>& epochs) {
  std::vector<double> out;
  out.reserve(epochs.size());
  for (const auto& e : epochs) out.push_back(static_cast<double>(e.length));
  return out;
}

Histogram epoch_histogram(const std::vector<EpochRecord>& epochs, double bin_width) {
  if (epochs.empty()) throw Error(ErrorCode::InvalidArgument, "epoch_histogram: no epochs");
  return make_histogram(epoch_lengths(epochs), bin_width, 1.0);
}

PairCoverage pair_coverage(const std::vector<EpochRecord>& epochs, long lo, long hi) {
  if (hi < lo) throw Error(ErrorCode::InvalidArgument, "pair_coverage: hi < lo");
  PairCoverage pc;
  pc.lo = lo;
  pc.hi = hi;
  for (std::size_t i = 0; i + 1 < epochs.size(); ++i) {
    const long m = epochs[i].length, n = epochs[i + 1].length;
    if (m >= lo && m <= hi && n >= lo && n <= hi) ++pc.counts[{m, n}];
  }
  const double side = static_cast<double>(hi - lo + 1);
  pc.coverage = static_cast<double>(pc.counts.size()) / (side * side);
  return pc;
}

}  // namespace jtenso
