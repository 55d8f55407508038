#include "jtenso/sections.hpp"

#include <cmath>
#include <numbers>

#include "jtenso/error.hpp"
#include "jtenso/parallel.hpp"

namespace jtenso {

std::array<int, 2> SectionSpec::free_indices() const {
  switch (coordinate) {
    case Axis::X: return {1, 2};
    case Axis::Y: return {0, 2};
    case Axis::Z: return {0, 1};
  }
  return {1, 2};
}

Vec3 SectionSpec::embed(double u, double v) const {
  Vec3 s{};
  const auto idx = free_indices();
  s[index()] = value;
  s[idx[0]] = u;
  s[idx[1]] = v;
  return s;
}

void SectionSpec::validate() const {
  if (!std::isfinite(value)) throw Error(ErrorCode::InvalidArgument, "section value must be finite");
}

template <std::size_t N>
void segment_crossings(const DenseSegment<N>& seg, int index, double value, Direction dir,
                       std::vector<double>& times, std::vector<int>& signs, double tol) {
  const double g0 = seg.coeff[0][index] - value;
  const double g1 = seg.coeff[0][index] + seg.coeff[1][index] - value;
  int sign = 0;
  if (g0 < 0.0 && g1 >= 0.0) sign = +1;
  else if (g0 > 0.0 && g1 <= 0.0) sign = -1;
  if (sign == 0) return;
  if ((dir == Direction::Increasing && sign < 0) || (dir == Direction::Decreasing && sign > 0)) return;

  double lo = seg.t0, hi = seg.t1();
  double glo = g0;
  double t = hi;
  double g = g1;
  for (int it = 0; it < 200 && std::abs(g) >= tol; ++it) {
    t = 0.5 * (lo + hi);
    g = seg.component(t, index) - value;
    if ((g < 0.0) == (glo < 0.0)) {
      lo = t;
      glo = g;
    } else {
      hi = t;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) break;
  }
  times.push_back(t);
  signs.push_back(sign);
}

template void segment_crossings<3>(const DenseSegment<3>&, int, double, Direction, std::vector<double>&,
                                   std::vector<int>&, double);
template void segment_crossings<12>(const DenseSegment<12>&, int, double, Direction, std::vector<double>&,
                                    std::vector<int>&, double);

std::vector<Crossing> detect_crossings(const JtField& field, const State& s0, const SectionSpec& section,
                                       const CrossingOptions& opts, const IntegratorConfig& cfg) {
  section.validate();
  std::vector<Crossing> out;
  const CrossingDetector detector(section);
  std::vector<Crossing> buf;
  integrate_steps<3>(field, s0, 0.0, opts.t_max, cfg, [&](const DenseSegment<3>& seg) {
    if (seg.t1() < opts.t_start) return true;
    buf.clear();
    detector.feed(seg, buf);
    for (const auto& c : buf) {
      if (c.t < opts.t_start || c.t < opts.skip_initial) continue;
      out.push_back(c);
      if (opts.max_crossings != 0 && out.size() >= opts.max_crossings) return false;
    }
    return true;
  });
  return out;
}

namespace {

constexpr double kOnSectionTolerance = 1e-8;
constexpr double kSkipInitial = 1e-6;

void check_on_section(const State& p, const SectionSpec& section) {
  if (std::abs(p[section.index()] - section.value) >= kOnSectionTolerance)
    throw Error(ErrorCode::InvalidArgument, "return-map input does not lie on the section");
}

}  // namespace

ReturnSample kth_return(const JtField& field, const State& point, const SectionSpec& section,
                        const ReturnOptions& opts, const IntegratorConfig& cfg) {
  check_on_section(point, section);
  if (opts.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const double t_max = opts.t_max_per_return * opts.k;
  const CrossingDetector detector(section);
  std::vector<Crossing> buf;
  int count = 0;
  std::optional<Crossing> hit;
  integrate_steps<3>(field, point, 0.0, t_max, cfg, [&](const DenseSegment<3>& seg) {
    buf.clear();
    detector.feed(seg, buf);
    for (const auto& c : buf) {
      if (c.t < kSkipInitial) continue;
      if (++count == opts.k) {
        hit = c;
        return false;
      }
    }
    return true;
  });
  if (!hit) throw Error(ErrorCode::NoReturn, "no return within t_max = " + std::to_string(t_max));
  return {point, hit->state, hit->t};
}

std::vector<std::optional<ReturnSample>> kth_returns(const JtField& field, const std::vector<State>& points,
                                                     const SectionSpec& section, const ReturnOptions& opts,
                                                     const IntegratorConfig& cfg, int jobs) {
  std::vector<std::optional<ReturnSample>> out(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t i) {
    try {
      out[i] = kth_return(field, points[i], section, opts, cfg);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoReturn) throw;
    }
  });
  return out;
}

ReturnWithJacobian kth_return_with_jacobian(const JtField& field, const State& point, const SectionSpec& section,
                                            const ReturnOptions& opts, const IntegratorConfig& cfg) {
  check_on_section(point, section);
  if (opts.k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  const double t_max = opts.t_max_per_return * opts.k;
  const int idx = section.index();
  std::vector<double> times;
  std::vector<int> signs;
  int count = 0;
  std::optional<Vec12> hit;
  double t_hit = 0.0;
  integrate_steps<12>(VariationalField<JtField>(field), pack(point, identity3()), 0.0, t_max, cfg,
                      [&](const DenseSegment<12>& seg) {
                        times.clear();
                        signs.clear();
                        segment_crossings(seg, idx, section.value, section.direction, times, signs);
                        for (double t : times) {
                          if (t < kSkipInitial) continue;
                          if (++count == opts.k) {
                            hit = seg(t);
                            t_hit = t;
                            return false;
                          }
                        }
                        return true;
                      });
  if (!hit) throw Error(ErrorCode::NoReturn, "no return within t_max = " + std::to_string(t_max));

  ReturnWithJacobian out;
  out.sample = {point, state_part(*hit), t_hit};
  out.fundamental = matrix_part(*hit);
  // Derivative of the hitting map: (I − f·e_iᵀ / f_i)·M.
  const Vec3 f = field(t_hit, out.sample.output);
  if (f[idx] == 0.0) throw Error(ErrorCode::SingularJacobian, "flow is tangent to the section at the return");
  Mat3 proj = identity3();
  for (int r = 0; r < 3; ++r) proj[r][idx] -= f[r] / f[idx];
  const Mat3 d = proj * out.fundamental;
  const auto fi = section.free_indices();
  out.dmap = {d[fi[0]][fi[0]], d[fi[0]][fi[1]], d[fi[1]][fi[0]], d[fi[1]][fi[1]]};
  return out;
}

std::vector<State> seed_unstable_manifold(const EquilibriumInfo& eq, double radius, int n_points) {
  if (!eq.saddle_focus || eq.eigenvalues[1].real() <= 0.0)
    throw Error(ErrorCode::NotSaddleFocus, "equilibrium has no unstable complex pair");
  if (n_points < 1) throw Error(ErrorCode::InvalidArgument, "n_points must be >= 1");
  Vec3 re{}, im{};
  for (int c = 0; c < 3; ++c) {
    re[c] = eq.eigenvectors[1][c].real();
    im[c] = eq.eigenvectors[1][c].imag();
  }
  const double scale = 1.0 / norm(re);
  std::vector<State> out;
  out.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double th = 2.0 * std::numbers::pi * i / n_points;
    out.push_back(eq.state + (radius * scale) * (std::cos(th) * re - std::sin(th) * im));
  }
  return out;
}

std::vector<Crossing> manifold_section(const JtField& field, const std::vector<State>& seeds,
                                       const SectionSpec& section, double t_max, const IntegratorConfig& cfg,
                                       int jobs) {
  std::vector<std::optional<Crossing>> found(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    CrossingOptions opts;
    opts.t_max = t_max;
    opts.max_crossings = 1;
    const auto c = detect_crossings(field, seeds[i], section, opts, cfg);
    if (!c.empty()) found[i] = c.front();
  });
  std::vector<Crossing> out;
  for (auto& c : found)
    if (c) out.push_back(*c);
  return out;
}

State PlaneCurve::point(double ind) const {
  State s{};
  s[section.index()] = section.value;
  s[independent] = ind;
  s[dependent] = (*this)(ind);
  return s;
}

double PlaneCurve::length() const {
  // Closed form of ∫ sqrt(1 + (c1 + 2c2·u)²) du.
  auto prim = [&](double u) {
    const double w = coeff[1] + 2.0 * coeff[2] * u;
    const double r = std::sqrt(1.0 + w * w);
    if (coeff[2] == 0.0) return r * u;
    return (w * r + std::asinh(w)) / (4.0 * coeff[2]);
  };
  return prim(ind_max) - prim(ind_min);
}

std::vector<State> PlaneCurve::sample(int n) const {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  if (n == 1) return {point(0.5 * (ind_min + ind_max))};
  // Tabulate arclength on a fine grid and invert by linear interpolation.
  const int fine = std::max(2000, 20 * n);
  std::vector<double> u(fine + 1), s(fine + 1, 0.0);
  for (int i = 0; i <= fine; ++i) u[i] = ind_min + (ind_max - ind_min) * i / fine;
  for (int i = 1; i <= fine; ++i) {
    const double dv = (*this)(u[i]) - (*this)(u[i - 1]);
    s[i] = s[i - 1] + std::hypot(u[i] - u[i - 1], dv);
  }
  std::vector<State> out;
  out.reserve(n);
  std::size_t j = 0;
  for (int i = 0; i < n; ++i) {
    const double target = s[fine] * i / (n - 1);
    while (j + 1 < static_cast<std::size_t>(fine) && s[j + 1] < target) ++j;
    const double w = s[j + 1] > s[j] ? (target - s[j]) / (s[j + 1] - s[j]) : 0.0;
    out.push_back(point(u[j] + std::clamp(w, 0.0, 1.0) * (u[j + 1] - u[j])));
  }
  return out;
}

PlaneCurve fit_quadratic(const std::vector<State>& points, const SectionSpec& section,
                         std::optional<int> independent) {
  if (points.size() < 3) throw Error(ErrorCode::DegenerateGeometry, "quadratic fit needs at least 3 points");
  const auto fi = section.free_indices();
  int ind = fi[0], dep = fi[1];
  if (independent) {
    if (*independent != fi[0] && *independent != fi[1])
      throw Error(ErrorCode::InvalidArgument, "independent coordinate must lie in the section");
    ind = *independent;
    dep = ind == fi[0] ? fi[1] : fi[0];
  } else {
    auto spread = [&](int c) {
      double lo = points[0][c], hi = points[0][c];
      for (const auto& p : points) {
        lo = std::min(lo, p[c]);
        hi = std::max(hi, p[c]);
      }
      return hi - lo;
    };
    if (spread(fi[1]) > spread(fi[0])) std::swap(ind, dep);
  }

  // Center and scale the independent coordinate for conditioning.
  double mean = 0.0;
  for (const auto& p : points) mean += p[ind];
  mean /= points.size();
  double scale = 0.0;
  for (const auto& p : points) scale = std::max(scale, std::abs(p[ind] - mean));
  if (scale == 0.0) throw Error(ErrorCode::DegenerateGeometry, "all points share the independent coordinate");

  // Normal equations in the scaled variable w = (u − mean)/scale.
  Mat3 ata{};
  Vec3 atb{};
  std::vector<double> distinct;
  for (const auto& p : points) {
    const double w = (p[ind] - mean) / scale;
    const double basis[3] = {1.0, w, w * w};
    for (int r = 0; r < 3; ++r) {
      atb[r] += basis[r] * p[dep];
      for (int c = 0; c < 3; ++c) ata[r][c] += basis[r] * basis[c];
    }
    if (std::find(distinct.begin(), distinct.end(), p[ind]) == distinct.end() && distinct.size() < 3)
      distinct.push_back(p[ind]);
  }
  Vec3 beta{};
  if (distinct.size() < 3 || !solve3(ata, atb, beta, 1e-13))
    throw Error(ErrorCode::DegenerateGeometry, "fewer than three distinct values of the independent coordinate");

  PlaneCurve curve;
  curve.section = section;
  curve.independent = ind;
  curve.dependent = dep;
  // Back to the unscaled variable.
  curve.coeff[2] = beta[2] / (scale * scale);
  curve.coeff[1] = beta[1] / scale - 2.0 * mean * curve.coeff[2];
  curve.coeff[0] = beta[0] - beta[1] * mean / scale + beta[2] * mean * mean / (scale * scale);
  curve.ind_min = curve.ind_max = points[0][ind];
  double ss = 0.0;
  for (const auto& p : points) {
    curve.ind_min = std::min(curve.ind_min, p[ind]);
    curve.ind_max = std::max(curve.ind_max, p[ind]);
    const double w = (p[ind] - mean) / scale;
    const double r = p[dep] - (beta[0] + w * (beta[1] + w * beta[2]));
    ss += r * r;
  }
  curve.n_points = points.size();
  curve.rms = std::sqrt(ss / points.size());

  // Standard error of the curvature coefficient from (AᵀA)⁻¹ and the
  // residual variance (only meaningful with more than 3 points).
  if (points.size() > 3) {
    const double sigma2 = ss / static_cast<double>(points.size() - 3);
    for (int c = 0; c < 3; ++c) {
      Vec3 e{}, col{};
      e[c] = 1.0;
      solve3(ata, e, col, 1e-13);
      curve.std_error[c] = std::sqrt(std::max(0.0, sigma2 * col[c]));
    }
    curve.std_error[1] /= scale;
    curve.std_error[2] /= scale * scale;
  }
  return curve;
}

std::vector<MapSample> approx_1d_return_map(const JtField& field, const PlaneCurve& curve, int n_samples,
                                            const ReturnOptions& opts, const IntegratorConfig& cfg, int jobs) {
  const auto pts = curve.sample(n_samples);
  const auto ret = kth_returns(field, pts, curve.section, opts, cfg, jobs);
  std::vector<MapSample> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!ret[i]) continue;
    out.push_back({pts[i][2], ret[i]->output[2], pts[i], ret[i]->output, ret[i]->elapsed});
  }
  return out;
}

double polyline_length(const std::vector<State>& pts) {
  double len = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) len += norm(pts[i] - pts[i - 1]);
  return len;
}

}  // namespace jtenso
