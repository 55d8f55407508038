#include "jtenso/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "jtenso/error.hpp"
#include "jtenso/parallel.hpp"

namespace jtenso {

void GridSpec::validate() const {
  plane.validate();
  if (nu < 2 || nv < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2x2 cells");
  for (double v : {u_min, u_max, v_min, v_max})
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "grid ranges must be finite");
  if (!(u_min < u_max) || !(v_min < v_max)) throw Error(ErrorCode::InvalidArgument, "grid ranges must be increasing");
}

// ---------------------------------------------------------------- FTLE

namespace {

struct SegmentStretch {
  double log10_sigma = 0.0;
  double max_x = -1e300;
};

SegmentStretch stretch(const JtField& field, const State& s0, double T, const IntegratorConfig& cfg) {
  SegmentStretch out;
  out.max_x = s0[0];
  if (T == 0.0) return out;
  Vec12 end{};
  integrate_steps<12>(
      VariationalField<JtField>(field), pack(s0, identity3()), 0.0, T, cfg,
      [&](const DenseSegment<12>& seg) {
        out.max_x = std::max(out.max_x, seg.end()[0]);
        return true;
      },
      &end);
  out.log10_sigma = std::log10(max_singular_value(matrix_part(end)));
  return out;
}

}  // namespace

double ftle(const JtField& field, const State& s0, double T, const IntegratorConfig& cfg) {
  if (!(T >= 0.0)) throw Error(ErrorCode::InvalidArgument, "FTLE horizon must be >= 0");
  return stretch(field, s0, T, cfg).log10_sigma;
}

FtleField ftle_grid(const JtField& field, const GridSpec& grid, double horizon, const IntegratorConfig& cfg,
                    int jobs) {
  grid.validate();
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "FTLE horizon must be positive");
  FtleField out;
  out.grid = grid;
  out.horizon = horizon;
  out.values.assign(grid.size(), 0.0);
  out.event_mask.assign(grid.size(), 0);
  parallel_for(grid.size(), jobs, [&](std::size_t k) {
    const int i = static_cast<int>(k % grid.nu), j = static_cast<int>(k / grid.nu);
    const auto s = stretch(field, grid.point(i, j), horizon, cfg);
    out.values[k] = s.log10_sigma;
    out.event_mask[k] = s.max_x > -1.5;
  });
  return out;
}

FtleContrast ftle_contrast(const FtleField& f) {
  std::vector<double> central;
  FtleContrast c;
  c.flank_max = -1e300;
  bool any_flank = false;
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    if (f.event_mask[k]) {
      central.push_back(f.values[k]);
    } else {
      c.flank_max = std::max(c.flank_max, f.values[k]);
      any_flank = true;
    }
  }
  if (central.empty() || !any_flank)
    throw Error(ErrorCode::DegenerateGeometry, "FTLE grid lacks either event or non-event cells");
  std::sort(central.begin(), central.end());
  const std::size_t n = central.size();
  c.central_median = n % 2 ? central[n / 2] : 0.5 * (central[n / 2 - 1] + central[n / 2]);
  c.central_cells = n;
  return c;
}

GridSpec default_ftle_grid(const EquilibriumInfo& eq) {
  GridSpec g;
  g.plane = {Axis::X, eq.state[0], Direction::Both};
  g.u_min = -0.9575;
  g.u_max = -0.8875;
  g.v_min = 1.618;
  g.v_max = 1.678;
  g.nu = g.nv = 50;
  return g;
}

// ---------------------------------------------------------- stretching

std::vector<ProfileSample> return_profile(const JtField& field, const SectionSpec& section, int k, const State& from,
                                          const State& to, int n, const IntegratorConfig& cfg, int jobs) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "profile needs at least 2 points");
  const auto fi = section.free_indices();
  const double du = to[fi[0]] - from[fi[0]], dv = to[fi[1]] - from[fi[1]];
  const double len = std::hypot(du, dv);
  if (len == 0.0) throw Error(ErrorCode::DegenerateGeometry, "profile segment has zero length");
  std::vector<std::optional<ProfileSample>> out(static_cast<std::size_t>(n));
  ReturnOptions ro;
  ro.k = k;
  parallel_for(out.size(), jobs, [&](std::size_t i) {
    const double w = static_cast<double>(i) / (n - 1);
    State in = section.embed(from[fi[0]] + w * du, from[fi[1]] + w * dv);
    try {
      const auto r = kth_return_with_jacobian(field, in, section, ro, cfg);
      ProfileSample s;
      s.s = w * len;
      s.input = in;
      s.output = r.sample.output;
      s.d_output = {(r.dmap[0] * du + r.dmap[1] * dv) / len, (r.dmap[2] * du + r.dmap[3] * dv) / len};
      out[i] = s;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoReturn) throw;
    }
  });
  std::vector<ProfileSample> kept;
  for (auto& s : out)
    if (s) kept.push_back(*s);
  return kept;
}

StretchPeak peak_stretch(const std::vector<ProfileSample>& profile, int component) {
  StretchPeak peak;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    // d_output is indexed by the section's free coordinates; for x
    // sections component 1 (y) is the first of them.
    const double d = std::abs(profile[i].d_output[component == 2 ? 1 : 0]);
    if (d > peak.stretch) {
      peak.stretch = d;
      peak.index = i;
    }
  }
  return peak;
}

double image_length(const JtField& field, const SectionSpec& section, int k, const State& centre,
                    std::array<double, 2> direction, double length, int n, const IntegratorConfig& cfg, int jobs) {
  const double dn = std::hypot(direction[0], direction[1]);
  if (dn == 0.0) throw Error(ErrorCode::InvalidArgument, "direction must be nonzero");
  const auto fi = section.free_indices();
  const double hu = 0.5 * length * direction[0] / dn, hv = 0.5 * length * direction[1] / dn;
  std::vector<State> pts;
  for (int i = 0; i < n; ++i) {
    const double w = 2.0 * i / (n - 1) - 1.0;
    pts.push_back(section.embed(centre[fi[0]] + w * hu, centre[fi[1]] + w * hv));
  }
  ReturnOptions ro;
  ro.k = k;
  const auto ret = kth_returns(field, pts, section, ro, cfg, jobs);
  std::vector<State> image;
  for (const auto& r : ret)
    if (r) image.push_back(r->output);
  return polyline_length(image);
}

// ----------------------------------------------------- attractor labels

const char* to_string(AttractorKind k) {
  switch (k) {
    case AttractorKind::MMO: return "MMO";
    case AttractorKind::Chaotic: return "chaotic";
    case AttractorKind::PeriodicNonMMO: return "periodic-non-MMO";
    case AttractorKind::Divergent: return "divergent";
    case AttractorKind::Undecided: return "undecided";
  }
  return "undecided";
}

char label_code(AttractorKind k) {
  switch (k) {
    case AttractorKind::MMO: return 'M';
    case AttractorKind::Chaotic: return 'C';
    case AttractorKind::PeriodicNonMMO: return 'P';
    case AttractorKind::Divergent: return 'D';
    case AttractorKind::Undecided: return 'U';
  }
  return 'U';
}

namespace {

int recurrence_period(const std::vector<double>& z, int max_period, double tol) {
  for (int P = 1; P <= max_period; ++P) {
    const std::size_t start = z.size() / 2;
    if (z.size() < start + static_cast<std::size_t>(P) + 2) return 0;
    bool ok = true;
    for (std::size_t k = start; k + P < z.size() && ok; ++k)
      if (std::abs(z[k + P] - z[k]) > tol) ok = false;
    if (ok) return P;
  }
  return 0;
}

}  // namespace

AttractorLabel classify_attractor(const JtField& field, const State& s0, const EquilibriumInfo& eq,
                                  const ClassifyOptions& opts, const IntegratorConfig& cfg) {
  if (!(opts.transient > 0.0) || !(opts.window > 0.0))
    throw Error(ErrorCode::InvalidArgument, "transient and window must be positive");
  const CrossingDetector events({Axis::X, opts.event_threshold, Direction::Increasing});
  const CrossingDetector returns({Axis::X, eq.state[0], Direction::Increasing});
  const Vec3& dir = eq.observable_direction;
  AttractorLabel label;
  label.max_x = -1e300;
  label.g_min = 1e300;
  label.g_max = -1e300;
  std::vector<double> z;
  std::vector<Crossing> buf;
  bool diverged = false;
  try {
    integrate_steps<3>(field, s0, 0.0, opts.transient + opts.window, cfg, [&](const DenseSegment<3>& seg) {
      const State& e = seg.end();
      if (norm(e) > opts.divergence_bound) {
        diverged = true;
        return false;
      }
      if (seg.t1() < opts.transient) return true;
      label.max_x = std::max(label.max_x, e[0]);
      const double g = dot(dir, e);
      label.g_min = std::min(label.g_min, g);
      label.g_max = std::max(label.g_max, g);
      buf.clear();
      events.feed(seg, buf);
      for (const auto& c : buf)
        if (c.t >= opts.transient) ++label.strong_events;
      buf.clear();
      returns.feed(seg, buf);
      for (const auto& c : buf)
        if (c.t >= opts.transient) z.push_back(c.state[2]);
      return !(opts.early_exit && label.strong_events > 0);
    });
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NonFiniteState && e.code() != ErrorCode::StepSizeUnderflow) throw;
    diverged = true;
  }
  label.returns = z.size();
  if (diverged) {
    label.kind = AttractorKind::Divergent;
    label.reason = "state left the bound";
    return label;
  }
  if (label.strong_events > 0) {
    label.kind = AttractorKind::MMO;
    label.max_x = std::max(label.max_x, opts.event_threshold);
    label.reason = "strong event after transient";
    return label;
  }
  label.period = recurrence_period(z, opts.max_period, opts.recurrence_tol);
  if (label.period > 0) {
    label.kind = AttractorKind::PeriodicNonMMO;
    label.reason = "return z recurs with period " + std::to_string(label.period);
  } else if (z.size() >= opts.min_returns) {
    label.kind = AttractorKind::Chaotic;
    label.reason = "no strong events, aperiodic returns";
  } else {
    label.kind = AttractorKind::Undecided;
    label.reason = "too few returns to decide";
  }
  return label;
}

AttractorLabel classify_attractor(const JtField& field, const State& s0, const ClassifyOptions& opts,
                                  const IntegratorConfig& cfg) {
  return classify_attractor(field, s0, saddle_focus(field.params()), opts, cfg);
}

// ------------------------------------------------------------- basins

std::size_t BasinGrid::count(AttractorKind k) const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), k));
}

std::size_t BasinGrid::boundary_cells() const {
  std::size_t n = 0;
  for (int j = 0; j < grid.nv; ++j)
    for (int i = 0; i < grid.nu; ++i) {
      const auto k = at(i, j);
      if ((i > 0 && at(i - 1, j) != k) || (i + 1 < grid.nu && at(i + 1, j) != k) ||
          (j > 0 && at(i, j - 1) != k) || (j + 1 < grid.nv && at(i, j + 1) != k))
        ++n;
    }
  return n;
}

BasinGrid basin_grid(const JtField& field, const GridSpec& grid, const ClassifyOptions& opts,
                     const IntegratorConfig& cfg, int jobs) {
  grid.validate();
  const auto eq = saddle_focus(field.params());
  BasinGrid out;
  out.grid = grid;
  out.labels.assign(grid.size(), AttractorKind::Undecided);
  parallel_for(grid.size(), jobs, [&](std::size_t k) {
    const int i = static_cast<int>(k % grid.nu), j = static_cast<int>(k / grid.nu);
    try {
      out.labels[k] = classify_attractor(field, grid.point(i, j), eq, opts, cfg).kind;
    } catch (const Error&) {
      out.labels[k] = AttractorKind::Undecided;
    }
  });
  return out;
}

std::vector<Crossing> attractor_section(const JtField& field, const State& seed, const EquilibriumInfo& eq,
                                        std::size_t n_crossings, double transient, const IntegratorConfig& cfg) {
  CrossingOptions o;
  o.t_start = transient;
  o.max_crossings = n_crossings;
  // Returns to x = x_eq come roughly every 2π/ω ≈ 6 model units; leave
  // generous room for slow passages.
  o.t_max = transient + 50.0 * static_cast<double>(n_crossings) + 100.0;
  return detect_crossings(field, seed, {Axis::X, eq.state[0], Direction::Increasing}, o, cfg);
}

GridSpec window_around(const std::vector<Crossing>& cloud, const SectionSpec& plane, double margin, int nu, int nv) {
  if (cloud.empty()) throw Error(ErrorCode::DegenerateGeometry, "empty point cloud");
  const auto fi = plane.free_indices();
  double u0 = 1e300, u1 = -1e300, v0 = 1e300, v1 = -1e300;
  for (const auto& c : cloud) {
    u0 = std::min(u0, c.state[fi[0]]);
    u1 = std::max(u1, c.state[fi[0]]);
    v0 = std::min(v0, c.state[fi[1]]);
    v1 = std::max(v1, c.state[fi[1]]);
  }
  GridSpec g;
  g.plane = plane;
  const double du = std::max(u1 - u0, 1e-9) * margin, dv = std::max(v1 - v0, 1e-9) * margin;
  g.u_min = u0 - du;
  g.u_max = u1 + du;
  g.v_min = v0 - dv;
  g.v_max = v1 + dv;
  g.nu = nu;
  g.nv = nv;
  return g;
}

State chaotic_seed(const EquilibriumInfo& eq) { return eq.state + Vec3{0.0, -0.0877, 0.0052}; }

State mmo_seed() { return {-1.5, -0.07566, 0.83542}; }

// ------------------------------------------------------------- crises

const char* to_string(CrisisDiagnostic d) {
  switch (d) {
    case CrisisDiagnostic::AttractorExtentJump: return "attractor-extent-jump";
    case CrisisDiagnostic::MinImageVsFixedPoint: return "min-image-vs-fixed-point";
    case CrisisDiagnostic::SaddleNode: return "saddle-node";
  }
  return "unknown";
}

namespace {

double diameter(const std::vector<Crossing>& cloud) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < cloud.size(); ++i)
    for (std::size_t j = i + 1; j < cloud.size(); ++j) {
      const double dy = cloud[i].state[1] - cloud[j].state[1], dz = cloud[i].state[2] - cloud[j].state[2];
      d2 = std::max(d2, dy * dy + dz * dz);
    }
  return std::sqrt(d2);
}

// Section crossings after the transient, or nullopt at the first strong
// event.
std::optional<std::vector<Crossing>> quiet_cloud(const JtField& field, const State& seed, const EquilibriumInfo& eq,
                                                 const ExtentOptions& opts, const IntegratorConfig& cfg) {
  const CrossingDetector returns({Axis::X, eq.state[0], Direction::Increasing});
  std::vector<Crossing> cloud, buf;
  bool escaped = false;
  const double t_max = opts.transient + 50.0 * static_cast<double>(opts.crossings) + 100.0;
  integrate_steps<3>(field, seed, 0.0, t_max, cfg, [&](const DenseSegment<3>& seg) {
    if (seg.end()[0] > -1.5) {
      escaped = true;
      return false;
    }
    if (seg.t1() < opts.transient) return true;
    buf.clear();
    returns.feed(seg, buf);
    for (const auto& c : buf)
      if (c.t >= opts.transient) cloud.push_back(c);
    return cloud.size() < opts.crossings;
  });
  if (escaped || cloud.size() < 2) return std::nullopt;
  return cloud;
}

}  // namespace

std::optional<SmallAttractor> small_attractor(const ModelParams& p, const ExtentOptions& opts,
                                              const IntegratorConfig& cfg, std::optional<State> hint) {
  const auto eq = saddle_focus(p);
  const JtField field(p);
  std::vector<State> seeds;
  if (hint) seeds.push_back(*hint);
  const State centre = chaotic_seed(eq);
  seeds.push_back(centre);
  const int n = std::max(1, opts.seed_grid);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double dy = n == 1 ? 0.0 : opts.seed_spread * (2.0 * i / (n - 1) - 1.0);
      const double dz = n == 1 ? 0.0 : opts.seed_spread * (2.0 * j / (n - 1) - 1.0);
      seeds.push_back(centre + Vec3{0.0, dy, dz});
    }
  std::optional<SmallAttractor> best;
  for (const auto& s : seeds) {
    auto cloud = quiet_cloud(field, s, eq, opts, cfg);
    if (!cloud) continue;
    const double d = diameter(*cloud);
    if (!best || d < best->diameter) best = SmallAttractor{std::move(*cloud), d, s};
    // The hint usually lands on the attractor; no need to try the lattice.
    if (hint && s == *hint) break;
  }
  return best;
}

double attractor_extent(const ModelParams& p, const ExtentOptions& opts, const IntegratorConfig& cfg,
                        std::optional<State> hint) {
  const auto a = small_attractor(p, opts, cfg, hint);
  return a ? a->diameter : std::numeric_limits<double>::infinity();
}

CrisisResult crisis_bisection(const ModelParams& p, double a_lo, double a_hi, double tol, const ExtentOptions& opts,
                              const IntegratorConfig& cfg) {
  if (!(a_lo < a_hi)) throw Error(ErrorCode::InvalidBracket, "bracket must satisfy lo < hi");
  const auto reference = small_attractor(p.with_a(a_hi), opts, cfg);
  if (!reference)
    throw Error(ErrorCode::InvalidBracket, "no small-amplitude attractor at the upper end a = " + std::to_string(a_hi));
  const State hint = reference->cloud.back().state;
  std::map<double, double> cache{{a_hi, reference->diameter}};
  std::vector<std::pair<double, double>> probes{{a_hi, reference->diameter}};
  auto extent = [&](double a) {
    auto it = cache.find(a);
    if (it != cache.end()) return it->second;
    const double e = attractor_extent(p.with_a(a), opts, cfg, hint);
    cache[a] = e;
    probes.emplace_back(a, e);
    return e;
  };
  auto r = bisect_flag(a_lo, a_hi, tol, [&](double a) { return extent(a) > opts.jump_factor * reference->diameter; });
  r.diagnostic = CrisisDiagnostic::AttractorExtentJump;
  r.probes = std::move(probes);
  return r;
}

// ------------------------------------------------ 1-D MMO return map

std::optional<double> Mmo1dMap::operator()(double z) const {
  constexpr double slack = 1e-6;
  if (samples.size() < 2 || z < samples.front().z_in - slack || z > samples.back().z_in + slack) return std::nullopt;
  z = std::clamp(z, samples.front().z_in, samples.back().z_in);
  auto it = std::lower_bound(samples.begin(), samples.end(), z,
                             [](const MapSample& s, double v) { return s.z_in < v; });
  if (it == samples.begin()) return it->z_ret;
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double w = (z - a.z_in) / (b.z_in - a.z_in);
  return a.z_ret + w * (b.z_ret - a.z_ret);
}

bool Mmo1dMap::maps_into(double lo, double hi) const {
  int inside = 0;
  for (const auto& s : samples) {
    if (s.z_in < lo || s.z_in > hi) continue;
    if (s.z_ret < lo || s.z_ret > hi) return false;
    ++inside;
  }
  return inside >= 2;
}

std::optional<FixedPoint1d> Mmo1dMap::positive_slope_fixed_point() const {
  std::optional<FixedPoint1d> best;
  for (const auto& f : fixed_points)
    if (f.slope > 0.0 && (!best || f.z > best->z)) best = f;
  return best;
}

bool Mmo1dMap::horseshoe() const {
  const auto q = positive_slope_fixed_point();
  const auto img = image_of_minimum();
  return q && img && *img > q->z;
}

Mmo1dMap mmo_return_map(const ModelParams& p, const Mmo1dOptions& opts, const IntegratorConfig& cfg, int jobs) {
  const JtField field(p);
  const auto eq = saddle_focus(p);
  const auto section = event_section();
  const auto seeds = seed_unstable_manifold(eq, opts.seed_radius, opts.manifold_seeds);
  const auto crossings = manifold_section(field, seeds, section, opts.manifold_t_max, cfg, jobs);
  if (crossings.size() < 3) throw Error(ErrorCode::NoReturn, "unstable manifold does not reach the event section");

  Mmo1dMap m;
  m.params = p;
  m.fold_z = 1e300;
  for (const auto& c : crossings) m.fold_z = std::min(m.fold_z, c.state[2]);
  std::vector<State> pts;
  for (const auto& c : crossings)
    if (c.state[2] < m.fold_z + opts.fold_window) {
      pts.push_back(c.state);
      m.manifold.push_back(c);
    }
  m.curve = fit_quadratic(pts, section, 2);

  auto raw = approx_1d_return_map(field, m.curve, opts.samples, opts.returns, cfg, jobs);
  std::sort(raw.begin(), raw.end(), [](const MapSample& a, const MapSample& b) { return a.z_in < b.z_in; });
  // Keep the unimodal branch that starts at the fold; beyond it the returns
  // leave the neighbourhood of the fold altogether.
  for (const auto& s : raw) {
    if (s.z_ret > m.fold_z + opts.branch_cap) break;
    m.samples.push_back(s);
  }
  if (m.samples.size() < 3) throw Error(ErrorCode::NoReturn, "too few returns on the fold branch");

  m.min_value = 1e300;
  for (const auto& s : m.samples)
    if (s.z_ret < m.min_value) {
      m.min_value = s.z_ret;
      m.min_z_in = s.z_in;
    }
  for (std::size_t i = 0; i + 1 < m.samples.size(); ++i) {
    const auto& a = m.samples[i];
    const auto& b = m.samples[i + 1];
    const double ga = a.z_ret - a.z_in, gb = b.z_ret - b.z_in;
    if ((ga < 0.0) == (gb < 0.0) || b.z_in == a.z_in) continue;
    const double w = ga / (ga - gb);
    m.fixed_points.push_back({a.z_in + w * (b.z_in - a.z_in), (b.z_ret - a.z_ret) / (b.z_in - a.z_in)});
  }
  return m;
}

CrisisResult mmo_crisis(const ModelParams& p, double a_lo, double a_hi, double tol, const Mmo1dOptions& opts,
                        const IntegratorConfig& cfg, int jobs) {
  std::vector<std::pair<double, double>> probes;
  auto r = bisect_flag(a_lo, a_hi, tol, [&](double a) {
    const auto m = mmo_return_map(p.with_a(a), opts, cfg, jobs);
    const auto q = m.positive_slope_fixed_point();
    const auto img = m.image_of_minimum();
    probes.emplace_back(a, q && img ? *img - q->z : std::nan(""));
    return m.horseshoe();
  });
  r.diagnostic = CrisisDiagnostic::MinImageVsFixedPoint;
  r.probes = std::move(probes);
  return r;
}

CrisisResult saddle_node(const ModelParams& p, double a_lo, double a_hi, double tol, const Mmo1dOptions& opts,
                         const IntegratorConfig& cfg, int jobs) {
  std::vector<std::pair<double, double>> probes;
  auto r = bisect_flag(a_lo, a_hi, tol, [&](double a) {
    const auto m = mmo_return_map(p.with_a(a), opts, cfg, jobs);
    // Signed gap between the map minimum and the diagonal.
    probes.emplace_back(a, m.min_value - m.min_z_in);
    return !m.fixed_points.empty();
  });
  r.diagnostic = CrisisDiagnostic::SaddleNode;
  r.probes = std::move(probes);
  return r;
}

MmoBoundary mmo_boundary(const ModelParams& p, std::pair<double, double> sn_bracket,
                         std::pair<double, double> crisis_bracket, double tol, const Mmo1dOptions& opts,
                         const IntegratorConfig& cfg, int jobs) {
  return {saddle_node(p, sn_bracket.first, sn_bracket.second, tol, opts, cfg, jobs),
          mmo_crisis(p, crisis_bracket.first, crisis_bracket.second, tol, opts, cfg, jobs)};
}

// ---------------------------------------------------- bistability strip

namespace {

template <class Run>
double expanding_bisection(double centre, double half_width, int max_expansions, Run&& run) {
  for (int e = 0;; ++e) {
    try {
      return run(centre - half_width, centre + half_width).critical;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::InvalidBracket || e >= max_expansions) throw;
      half_width *= 2.0;
    }
  }
}

}  // namespace

namespace {

// Bracket centre for δ: the nearest solved row shifted along the boundary
// slope (fitted once two rows are known).
double predict(const std::vector<std::pair<double, double>>& solved, double delta, double fallback_a,
               double fallback_delta, double slope) {
  if (solved.empty()) return fallback_a + slope * (delta - fallback_delta);
  if (solved.size() >= 2) {
    std::vector<double> x, y;
    for (const auto& [d, a] : solved) {
      x.push_back(d);
      y.push_back(a);
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= x.size();
    my /= y.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
    if (sxx > 0) slope = sxy / sxx;
  }
  const auto nearest = *std::min_element(solved.begin(), solved.end(), [&](const auto& l, const auto& r) {
    return std::abs(l.first - delta) < std::abs(r.first - delta);
  });
  return nearest.second + slope * (delta - nearest.first);
}

}  // namespace

std::vector<StripRow> bistability_strip(const ModelParams& base, const std::vector<double>& deltas,
                                        const StripOptions& opts, const IntegratorConfig& cfg, int jobs) {
  std::vector<StripRow> rows(deltas.size());
  std::vector<std::size_t> order(deltas.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto i, auto j) {
    return std::abs(deltas[i] - opts.reference_delta) < std::abs(deltas[j] - opts.reference_delta);
  });
  std::vector<std::pair<double, double>> chaotic_solved, mmo_solved;
  for (std::size_t i : order) {
    StripRow& row = rows[i];
    row.delta = deltas[i];
    const ModelParams p = base.with_delta(deltas[i]);
    try {
      const double centre = predict(chaotic_solved, row.delta, opts.chaotic_reference_a, opts.reference_delta,
                                    opts.boundary_slope);
      row.a_chaotic_crisis = expanding_bisection(centre, opts.chaotic_half_width, opts.max_expansions,
                                                 [&](double lo, double hi) {
                                                   return crisis_bisection(p, lo, hi, opts.chaotic_tol, opts.extent,
                                                                           cfg);
                                                 });
      chaotic_solved.emplace_back(row.delta, *row.a_chaotic_crisis);
    } catch (const Error& e) {
      row.error += std::string("chaotic: ") + e.what() + "; ";
    }
    try {
      const double centre =
          predict(mmo_solved, row.delta, opts.mmo_reference_a, opts.reference_delta, opts.boundary_slope);
      row.a_mmo_crisis = expanding_bisection(centre, opts.mmo_half_width, opts.max_expansions,
                                             [&](double lo, double hi) {
                                               return mmo_crisis(p, lo, hi, opts.mmo_tol, opts.mmo, cfg, jobs);
                                             });
      mmo_solved.emplace_back(row.delta, *row.a_mmo_crisis);
    } catch (const Error& e) {
      row.error += std::string("mmo: ") + e.what() + "; ";
    }
  }
  return rows;
}

}  // namespace jtenso
