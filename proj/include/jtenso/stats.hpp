#pragma once

// Small statistics helpers shared by the map and epoch analyses.

#include <cstddef>
#include <vector>

namespace jtenso {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

/// Ordinary least squares y ≈ intercept + slope·x. R² is 1 for a perfect
/// fit and for fewer than three points with distinct x.
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

struct Histogram {
  double bin_width = 1.0;
  double origin = 0.0;
  /// counts[i] covers [origin + i·w, origin + (i+1)·w).
  std::vector<std::size_t> counts;
  /// ln(count) against bin centre over the occupied bins.
  LinearFit log_fit;

  double left(std::size_t i) const { return origin + static_cast<double>(i) * bin_width; }
  double centre(std::size_t i) const { return left(i) + 0.5 * bin_width; }
  std::size_t occupied() const;
};

/// Histogram of values in [origin, cutoff) (no cutoff when cutoff ≤ origin),
/// with the log-linear fit attached.
Histogram make_histogram(const std::vector<double>& values, double bin_width, double origin = 0.0,
                         double cutoff = 0.0);

/// Spearman rank correlation with average ranks for ties. Returns 0 when
/// either sample is constant.
double spearman(const std::vector<double>& a, const std::vector<double>& b);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace jtenso
