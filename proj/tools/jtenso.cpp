// jtenso: one subcommand per experiment, driven by a flat key = value
// config. Every run writes its artifacts plus manifest.json and the
// resolved config.cfg into the output directory.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "artifacts.hpp"
#include "jtenso/analysis.hpp"
#include "jtenso/config.hpp"
#include "jtenso/epochs.hpp"
#include "jtenso/map1d.hpp"
#include "jtenso/orbits.hpp"
#include "jtenso/sde.hpp"
#include "jtenso/sections.hpp"

namespace fs = std::filesystem;
using namespace jtenso;
using namespace jtenso::cli;

namespace {

enum ExitCode { kOk = 0, kConfigError = 2, kNumericsError = 3, kNoResult = 4 };

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::Config:
    case ErrorCode::InvalidArgument: return kConfigError;
    case ErrorCode::NoEpochs: return kNoResult;
    default: return kNumericsError;
  }
}

// ---------------------------------------------------------------- helpers

Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::X;
  if (s == "y") return Axis::Y;
  if (s == "z") return Axis::Z;
  throw Error(ErrorCode::Config, "section_axis must be x, y or z");
}

Direction parse_direction(const std::string& s) {
  if (s == "increasing") return Direction::Increasing;
  if (s == "decreasing") return Direction::Decreasing;
  if (s == "both") return Direction::Both;
  throw Error(ErrorCode::Config, "section_direction must be increasing, decreasing or both");
}

const char* axis_name(int i) { return i == 0 ? "x" : i == 1 ? "y" : "z"; }

State read_initial(ConfigReader& r, const EquilibriumInfo& eq) {
  const auto which = r.text("initial", "mmo");
  State s;
  if (which == "mmo") s = mmo_seed();
  else if (which == "chaotic") s = chaotic_seed(eq);
  else if (which == "equilibrium") s = eq.state;
  else throw Error(ErrorCode::Config, "initial must be mmo, chaotic or equilibrium");
  if (auto v = r.optional_number("x0")) s[0] = *v;
  if (auto v = r.optional_number("y0")) s[1] = *v;
  if (auto v = r.optional_number("z0")) s[2] = *v;
  return s;
}

/// Optional explicit (y, z) window; all four keys or none.
std::optional<std::array<double, 4>> read_window(ConfigReader& r) {
  const auto a = r.optional_number("y_min"), b = r.optional_number("y_max");
  const auto c = r.optional_number("z_min"), d = r.optional_number("z_max");
  const int given = !!a + !!b + !!c + !!d;
  if (given == 0) return std::nullopt;
  if (given != 4) throw Error(ErrorCode::Config, "give all of y_min, y_max, z_min, z_max or none");
  return std::array<double, 4>{*a, *b, *c, *d};
}

json params_json(const ModelParams& p) {
  return {{"delta", p.delta}, {"rho", p.rho}, {"c", p.c}, {"k", p.k}, {"a", p.a}};
}

json grid_json(const GridSpec& g) {
  const auto fi = g.plane.free_indices();
  return {{"plane", {{"axis", axis_name(g.plane.index())}, {"value", g.plane.value}}},
          {"columns", {{"coordinate", axis_name(fi[0])}, {"min", g.u_min}, {"max", g.u_max}, {"n", g.nu}}},
          {"rows", {{"coordinate", axis_name(fi[1])}, {"min", g.v_min}, {"max", g.v_max}, {"n", g.nv}}},
          {"layout", "row j holds cells with the row coordinate at index j, ascending"}};
}

json complex_json(std::complex<double> z) { return {{"re", z.real()}, {"im", z.imag()}}; }

json histogram_json(const Histogram& h) {
  return {{"bin_width", h.bin_width},
          {"occupied_bins", h.occupied()},
          {"log_fit", {{"slope", h.log_fit.slope}, {"intercept", h.log_fit.intercept},
                       {"r_squared", h.log_fit.r_squared}, {"n", h.log_fit.n}}}};
}

void write_histogram(Csv& csv, const Histogram& h) {
  for (std::size_t i = 0; i < h.counts.size(); ++i)
    if (h.counts[i] > 0) csv.row(h.left(i), static_cast<long>(h.counts[i]));
}

/// Fills ctx.out_dir, validates the config and creates the directory.
/// Called once every key of the subcommand has been read.
void begin(ConfigReader& r, RunContext& ctx, const std::string& out_flag) {
  auto dir = r.text("output_dir", "out/" + ctx.command);
  if (const char* env = std::getenv("JTENSO_OUTPUT_DIR"); env && *env) dir = env;
  if (!out_flag.empty()) dir = out_flag;
  r.finish();
  ctx.out_dir = dir;
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw Error(ErrorCode::Config, "cannot create output directory " + dir + ": " + ec.message());
}

// ---------------------------------------------------------------- simulate

void cmd_simulate(ConfigReader& r, RunContext& ctx, const std::string& out_flag) {
  const auto p = read_model(r);
  const auto f = read_forcing(r, p.a);
  const auto cfg = read_integrator(r);
  const auto eq = saddle_focus(p);
  const auto s0 = read_initial(r, eq);
  const double t_end = r.number("t_end", 2000.0);
  const double sample_dt = r.number("sample_dt", 0.1);
  const double sde_dt = r.number("sde_dt", 0.01);
  SectionSpec section;
  section.coordinate = parse_axis(r.text("section_axis", "x"));
  section.value = r.number("section_value", -1.5);
  section.direction = parse_direction(r.text("section_direction", "decreasing"));
  begin(r, ctx, out_flag);
  if (!(t_end > 0.0) || !(sample_dt > 0.0)) throw Error(ErrorCode::Config, "t_end and sample_dt must be positive");

  const JtField field(p, f);
  Trajectory<3> traj;
  if (f.noise_sigma > 0.0) {
    auto plan = NoisePlan::isotropic(f.noise_sigma, sde_dt, f.seed);
    plan.store_every = std::max(1L, std::lround(sample_dt / sde_dt));
    traj = integrate_sde(field, s0, 0.0, t_end, plan);
  } else {
    long n = 0;
    integrate_steps<3>(field, s0, 0.0, t_end, cfg, [&](const DenseSegment<3>& seg) {
      for (double t = n * sample_dt; t <= seg.t1() && t <= t_end; t = (++n) * sample_dt) {
        traj.times.push_back(t);
        traj.states.push_back(seg(t));
      }
      return true;
    });
  }

  Csv tcsv(ctx.file("trajectory.csv"), "t,x,y,z");
  double max_x = -1e300;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& s = traj.states[i];
    tcsv.row(traj.times[i], s[0], s[1], s[2]);
    max_x = std::max(max_x, s[0]);
  }

  // Section crossings: refined on the dense output for deterministic runs,
  // linearly interpolated between stored samples for stochastic ones.
  std::vector<Crossing> crossings;
  if (f.noise_sigma > 0.0) {
    const int idx = section.index();
    for (std::size_t i = 1; i < traj.times.size(); ++i) {
      const double a = traj.states[i - 1][idx] - section.value, b = traj.states[i][idx] - section.value;
      const int dir = a < 0.0 && b >= 0.0 ? 1 : a > 0.0 && b <= 0.0 ? -1 : 0;
      if (dir == 0) continue;
      if ((section.direction == Direction::Increasing && dir < 0) ||
          (section.direction == Direction::Decreasing && dir > 0))
        continue;
      const double w = a / (a - b);
      Crossing c;
      c.t = traj.times[i - 1] + w * (traj.times[i] - traj.times[i - 1]);
      for (int k = 0; k < 3; ++k) c.state[k] = traj.states[i - 1][k] + w * (traj.states[i][k] - traj.states[i - 1][k]);
      c.direction = dir;
      crossings.push_back(c);
    }
  } else {
    CrossingOptions co;
    co.t_max = t_end;
    crossings = detect_crossings(field, s0, section, co, cfg);
  }
  Csv ccsv(ctx.file("crossings.csv"), "t,x,y,z,dir");
  for (const auto& c : crossings) ccsv.row(c.t, c.state[0], c.state[1], c.state[2], c.direction);

  json summary;
  summary["max_x"] = max_x;
  summary["crossings"] = crossings.size();
  summary["year_length"] = year_length(p);
  if (crossings.size() >= 2) {
    const double mean = (crossings.back().t - crossings.front().t) / static_cast<double>(crossings.size() - 1);
    summary["mean_crossing_interval"] = mean;
    summary["mean_crossing_interval_years"] = to_years(mean, p);
  }
  write_json(ctx.file("summary.json"), summary);
}

// ---------------------------------------------------------------- map1d

void cmd_map1d(ConfigReader& r, RunContext& ctx, const std::string& out_flag) {
  const double alpha = r.number("alpha", 2.6);
  const double x0 = r.number("x0", 0.2);
  const auto n = r.integer("n", 1'000'000);
  const double sigma = r.number("map_sigma", 0.0);
  const auto seed = static_cast<std::uint64_t>(r.integer("seed", 0));
  const double bin_width = r.number("bin_width", 1.0);
  const auto pair_lo = r.integer("pair_lo", 8);
  const auto pair_hi = r.integer("pair_hi", 60);
  const auto orbit_rows = r.integer("orbit_rows", 1000);
  begin(r, ctx, out_flag);
  if (n < 1) throw Error(ErrorCode::Config, "n must be positive");

  std::optional<MapNoise> noise;
  if (sigma > 0.0) noise = MapNoise{sigma, seed};
  const auto orbit = iterate(x0, n, alpha, noise);
  const auto epochs = epochs_by_sign(orbit);
  const auto hist = epoch_histogram(epochs, bin_width);
  const auto pairs = pair_coverage(epochs, pair_lo, pair_hi);

  Csv ocsv(ctx.file("orbit.csv"), "n,x");
  const auto rows = std::min<std::int64_t>(orbit_rows, static_cast<std::int64_t>(orbit.values.size()));
  for (std::int64_t i = 0; i < rows; ++i) ocsv.row(static_cast<long>(i), orbit.values[i]);
  Csv ecsv(ctx.file("epochs.csv"), "start,length,sign");
  for (const auto& e : epochs) ecsv.row(e.start_index, e.length, e.sign);
  Csv hcsv(ctx.file("histogram.csv"), "length,count");
  write_histogram(hcsv, hist);
  Csv pcsv(ctx.file("pairs.csv"), "m,n,count");
  for (const auto& [mn, count] : pairs.counts) pcsv.row(mn.first, mn.second, count);

  // The first and last epochs are cut by the ends of the orbit.
  long min_len = 0, max_len = 0;
  if (epochs.size() > 2) {
    min_len = max_len = epochs[1].length;
    for (std::size_t i = 1; i + 1 < epochs.size(); ++i) {
      min_len = std::min(min_len, epochs[i].length);
      max_len = std::max(max_len, epochs[i].length);
    }
  }
  json summary;
  summary["epochs"] = epochs.size();
  summary["interior_min_length"] = min_len;
  summary["interior_max_length"] = max_len;
  summary["histogram"] = histogram_json(hist);
  summary["pair_coverage"] = {{"lo", pairs.lo}, {"hi", pairs.hi}, {"coverage", pairs.coverage}};
  write_json(ctx.file("summary.json"), summary);
}

// ---------------------------------------------------------------- basin

void cmd_basin(ConfigReader& r, RunContext& ctx, const std::string& out_flag) {
  const auto p = read_model(r);
  const auto cfg = read_integrator(r, classification_config());
  const int nu = static_cast<int>(r.integer("nu", 500));
  const int nv = static_cast<int>(r.integer("nv", 500));
  const double margin = r.number("margin", 0.2);
  const auto cloud_n = r.integer("cloud_crossings", 400);
  ClassifyOptions opts;
  opts.transient = r.number("transient", opts.transient);
  opts.window = r.number("window", opts.window);
  const auto window = read_window(r);
  begin(r, ctx, out_flag);

  const JtField field(p);
  const auto eq = saddle_focus(p);
  const SectionSpec plane{Axis::X, eq.state[0], Direction::Increasing};
  GridSpec grid;
  std::string source;
  if (window) {
    grid.plane = plane;
    grid.u_min = (*window)[0];
    grid.u_max = (*window)[1];
    grid.v_min = (*window)[2];
    grid.v_max = (*window)[3];
    grid.nu = nu;
    grid.nv = nv;
    source = "explicit";
  } else {
    const auto cloud = attractor_section(field, chaotic_seed(eq), eq, static_cast<std::size_t>(cloud_n),
                                         opts.transient, cfg);
    grid = window_around(cloud, plane, margin, nu, nv);
    source = "chaotic attractor section with margin " + format_number(margin);
  }
  grid.validate();
  const auto basin = basin_grid(field, grid, opts, cfg, ctx.jobs);

  Csv csv(ctx.file("basin.csv"), "# labels: M=MMO C=chaotic P=periodic non-MMO D=divergent U=undecided");
  for (int j = 0; j < grid.nv; ++j)
    csv.line(basin.labels, static_cast<std::size_t>(j) * grid.nu, grid.nu,
             [](AttractorKind k) { return std::string(1, label_code(k)); });
  json side;
  side["grid"] = grid_json(grid);
  side["window_source"] = source;
  side["params"] = params_json(p);
  side["config_hash"] = config_hash(r.resolved());
  side["counts"] = {{"MMO", basin.count(AttractorKind::MMO)},
                    {"chaotic", basin.count(AttractorKind::Chaotic)},
                    {"periodic_non_mmo", basin.count(AttractorKind::PeriodicNonMMO)},
                    {"divergent", basin.count(AttractorKind::Divergent)},
                    {"undecided", basin.count(AttractorKind::Undecided)}};
  side["boundary_cells"] = basin.boundary_cells();
  write_json(ctx.file("basin.json"), side);
}

// ---------------------------------------------------------------- ftle

void cmd_ftle(ConfigReader& r, RunContext& ctx, const std::string& out_flag) {
  const auto p = read_model(r);
  const auto cfg = read_integrator(r);
  const auto eq = saddle_focus(p);
  auto grid = default_ftle_grid(eq);
  grid.nu = static_cast<int>(r.integer("nu", grid.nu));
  grid.nv = static_cast<int>(r.integer("nv", grid.nv));
  const double horizon = r.number("horizon", default_ftle_horizon(p));
  if (const auto w = read_window(r)) {
    grid.u_min = (*w)[0];
    grid.u_max = (*w)[1];
    grid.v_min = (*w)[2];
    grid.v_max = (*w)[3];
  }
  begin(r, ctx, out_flag);
  grid.validate();

  const auto field_values = ftle_grid(JtField(p), grid, horizon, cfg, ctx.jobs);
  Csv csv(ctx.file("ftle.csv"), "# log10 of the largest singular value of the flow-map derivative");
  for (int j = 0; j < grid.nv; ++j)
    csv.line(field_values.values, static_cast<std::size_t>(j) * grid.nu, grid.nu, format_number);
  Csv mask(ctx.file("event_mask.csv"), "# 1 where the segment makes a strong event (x > -1.5)");
  for (int j = 0; j < grid.nv; ++j)
    mask.line(field_values.event_mask, static_cast<std::size_t>(j) * grid.nu, grid.nu,
              [](char c) { return std::string(c ? "1" : "0"); });

  json side;
  side["grid"] = grid_json(grid);
  side["horizon"] = horizon;
  side["horizon_slow_time"] = horizon * p.delta;
  side["params"] = params_json(p);
  side["config_hash"] = config_hash(r.resolved());
  try {
    const auto c = ftle_contrast(field_values);
    side["contrast"] = {{"central_median", c.central_median}, {"flank_max", c.flank_max},
                        {"central_cells", c.central_cells}, {"difference", c.contrast()}};
  } catch (const Error& e) {
    side["contrast"] = {{"error", e.what()}};
  }
  write_json(ctx.file("ftle.json"), side);
}

// ---------------------------------------------------------------- returnmap

void cmd_returnmap(ConfigReader& r, RunContext& ctx, const std::string& out_flag) {
  const auto p = read_model(r);
  const auto cfg = read_integrator(r);
  const int k = static_cast<int>(r.integer("k", 1));
  const double guess_y = r.number("guess_y", -0.07566);
  const double guess_z = r.number("guess_z", 0.83542);
  Mmo1dOptions mopts;
  mopts.samples = static_cast<int>(r.integer("samples", mopts.samples));
  mopts.manifold_seeds = static_cast<int>(r.integer("manifold_seeds", mopts.manifold_seeds));
  mopts.fold_window = r.number("fold_window", mopts.fold_window);
  mopts.branch_cap = r.number("branch_cap", mopts.branch_cap);
  const int profile_k = static_cast<int>(r.integer("profile_k", 3));
  const double profile_z = r.number("profile_z", 1.6195);
  const double profile_y0 = r.number("profile_y_from", -0.7835);
  const double profile_y1 = r.number("profile_y_to", -0.7485);
  const int profile_points = static_cast<int>(r.integer("profile_points", 351));
  const double segment_length = r.number("segment_length", 5e-4);
  const int segment_points = static_cast<int>(r.integer("segment_points", 100));
  begin(r, ctx, out_flag);

  const JtField field(p);
  const auto eq = saddle_focus(p);

  // Periodic orbit on the event section.
  const auto section = event_section();
  json orbit_doc;
  try {
    const auto orbit = newton_periodic(field, section, k, section.embed(guess_y, guess_z), {}, cfg);
    const auto mono = monodromy(field, orbit, cfg);
    json mults = json::array(), floquet = json::array();
    for (const auto& m : orbit.multipliers) mults.push_back(complex_json(m));
    for (const auto& m : mono.multipliers) floquet.push_back(complex_json(m));
    orbit_doc = {{"section", {{"axis", "x"}, {"value", section.value}, {"direction", "decreasing"}}},
                 {"k", orbit.k},
                 {"point", {orbit.section_point[0], orbit.section_point[1], orbit.section_point[2]}},
                 {"period", orbit.period},
                 {"period_years", to_years(orbit.period, p)},
                 {"multipliers", mults},
                 {"rank_deficient", orbit.rank_deficient},
                 {"stability", to_string(orbit.classification.stability)},
                 {"orientable", orbit.classification.orientable},
                 {"newton_iterations", orbit.iterations},
                 {"residual_history", orbit.residual_history},
                 {"monodromy", {{"multipliers", floquet},
                                {"trivial_index", mono.trivial_index},
                                {"det", mono.det},
                                {"liouville_det", mono.liouville_det},
                                {"max_segment_liouville_error", mono.max_segment_liouville_error}}}};
  } catch (const Error& e) {
    orbit_doc = {{"error", e.what()}};
  }
  write_json(ctx.file("orbit.json"), orbit_doc);

  // Approximately 1-D map along the unstable-manifold fold.
  const auto map = mmo_return_map(p, mopts, cfg, ctx.jobs);
  Csv rcsv(ctx.file("returns.csv"), "y_in,z_in,y_out,z_out,dt");
  Csv mcsv(ctx.file("return_map.csv"), "z_in,z_ret");
  for (const auto& s : map.samples) {
    rcsv.row(s.input[1], s.input[2], s.output[1], s.output[2], s.elapsed);
    mcsv.row(s.z_in, s.z_ret);
  }
  Csv fcsv(ctx.file("manifold.csv"), "y,z");
  for (const auto& c : map.manifold) fcsv.row(c.state[1], c.state[2]);
  json fixed = json::array();
  for (const auto& fp : map.fixed_points) fixed.push_back({{"z", fp.z}, {"slope", fp.slope}});
  const auto q = map.positive_slope_fixed_point();
  const auto image = map.image_of_minimum();
  json map_doc = {{"fold_z", map.fold_z},
                  {"curve", {{"independent", "z"}, {"coefficients", map.curve.coeff}, {"rms", map.curve.rms}}},
                  {"minimum", {{"z_in", map.min_z_in}, {"value", map.min_value}}},
                  {"image_of_minimum", image ? json(*image) : json(nullptr)},
                  {"fixed_points", fixed},
                  {"positive_slope_fixed_point", q ? json(q->z) : json(nullptr)},
                  {"horseshoe", map.horseshoe()}};

  // Stretching along a short line on the x = x_eq section.
  const auto ridge = ridge_section(eq);
  const auto profile = return_profile(field, ridge, profile_k, ridge.embed(profile_y0, profile_z),
                                      ridge.embed(profile_y1, profile_z), profile_points, cfg, ctx.jobs);
  Csv scsv(ctx.file("profile.csv"), "s,y_in,z_in,y_out,z_out,dy_out_dy_in,dz_out_dy_in");
  for (const auto& s : profile)
    scsv.row(s.s, s.input[1], s.input[2], s.output[1], s.output[2], s.d_output[0], s.d_output[1]);
  json stretch_doc;
  if (!profile.empty()) {
    const auto peak = peak_stretch(profile);
    const auto& at = profile[peak.index];
    const double len = image_length(field, ridge, profile_k, at.input, {1.0, 0.0}, segment_length,
                                    segment_points, cfg, ctx.jobs);
    stretch_doc = {{"section", {{"axis", "x"}, {"value", ridge.value}, {"direction", "decreasing"}}},
                   {"k", profile_k},
                   {"peak_stretch", peak.stretch},
                   {"peak_y", at.input[1]},
                   {"segment_length", segment_length},
                   {"image_length", len}};
  }
  write_json(ctx.file("returnmap.json"), {{"params", params_json(p)}, {"map1d", map_doc}, {"stretch", stretch_doc}});
}

// ---------------------------------------------------------------- crisis

json crisis_json(const CrisisResult& c) {
  json probes = json::array();
  for (const auto& [a, v] : c.probes) probes.push_back({a, number_or_null(v)});
  return {{"diagnostic", to_string(c.diagnostic)},
          {"critical", c.critical},
          {"bracket", {c.lo, c.hi}},
          {"flags", {c.flag_lo, c.flag_hi}},
          {"iterations", c.iterations},
          {"probes", probes}};
}

void cmd_crisis(ConfigReader& r, RunContext& ctx, const std::string& out_flag) {
  const auto p = read_model(r);
  const auto cfg = read_integrator(r);
  const auto which = r.text("which", "all");
  const double a_lo = r.number("a_lo", 7.3930), a_hi = r.number("a_hi", 7.3945), tol = r.number("tol", 1e-6);
  const double sn_lo = r.number("sn_lo", 7.3915), sn_hi = r.number("sn_hi", 7.3939);
  const double mmo_lo = r.number("mmo_lo", 7.3945), mmo_hi = r.number("mmo_hi", 7.3960);
  const double mmo_tol = r.number("mmo_tol", 1e-5);
  begin(r, ctx, out_flag);
  if (which != "all" && which != "chaotic" && which != "mmo")
    throw Error(ErrorCode::Config, "which must be all, chaotic or mmo");

  json doc;
  doc["params"] = params_json(p);
  Csv probes(ctx.file("probes.csv"), "diagnostic,a,value");
  auto add = [&](const std::string& name, const CrisisResult& c) {
    doc[name] = crisis_json(c);
    for (const auto& [a, v] : c.probes) probes.row(to_string(c.diagnostic), a, v);
  };
  if (which != "mmo") add("chaotic_crisis", crisis_bisection(p, a_lo, a_hi, tol, {}, cfg));
  if (which != "chaotic") {
    const auto b = mmo_boundary(p, {sn_lo, sn_hi}, {mmo_lo, mmo_hi}, mmo_tol, {}, cfg, ctx.jobs);
    add("saddle_node", b.saddle_node);
    add("mmo_crisis", b.crisis);
  }
  write_json(ctx.file("crisis.json"), doc);
}

// ---------------------------------------------------------------- strip

void cmd_strip(ConfigReader& r, RunContext& ctx, const std::string& out_flag) {
  const auto p = read_model(r);
  const auto cfg = read_integrator(r);
  auto deltas = r.numbers("deltas", {0.2250, 0.2252, 0.225423, 0.2256, 0.2258});
  StripOptions opts;
  opts.chaotic_tol = r.number("chaotic_tol", opts.chaotic_tol);
  opts.mmo_tol = r.number("mmo_tol", opts.mmo_tol);
  opts.boundary_slope = r.number("boundary_slope", opts.boundary_slope);
  begin(r, ctx, out_flag);

  const auto rows = bistability_strip(p, deltas, opts, cfg, ctx.jobs);
  Csv csv(ctx.file("strip.csv"), "delta,a_chaotic_crisis,a_mmo_crisis");
  json errors = json::array();
  for (const auto& row : rows) {
    csv.row(row.delta, row.a_chaotic_crisis.value_or(NAN), row.a_mmo_crisis.value_or(NAN));
    if (!row.error.empty()) errors.push_back({{"delta", row.delta}, {"error", row.error}});
  }
  write_json(ctx.file("strip.json"), {{"params", params_json(p)}, {"errors", errors}});
}

// ---------------------------------------------------------------- epochs

void cmd_epochs(ConfigReader& r, RunContext& ctx, const std::string& out_flag) {
  const auto p = read_model(r);
  // Switching needs the weak annual cycle, so it is on by default here.
  const Forcing f = read_forcing(r, p.a, 0.002);
  const auto cfg = read_integrator(r);
  const auto eq = saddle_focus(p);
  const auto s0 = read_initial(r, eq);
  ForcedRunOptions o;
  o.years = r.number("years", o.years);
  o.sample_dt = r.number("sample_dt", o.sample_dt);
  o.store_every = static_cast<long>(r.integer("store_every", o.store_every));
  o.hi = r.number("threshold_hi", o.hi);
  o.lo = r.number("threshold_lo", o.lo);
  o.noise_dt = r.number("noise_dt", o.noise_dt);
  const double min_gap = r.number("min_gap", 15.0);
  const double bin_width = r.number("bin_width", 10.0);
  const double cutoff = r.number("cutoff", 400.0);
  begin(r, ctx, out_flag);

  const auto run = forced_run(p, f, s0, o, cfg);
  Csv gcsv(ctx.file("g_series.csv"), "t,g");
  for (std::size_t i = 0; i < run.series.t.size(); ++i) gcsv.row(run.series.t[i], run.series.g[i]);
  std::vector<std::pair<double, double>> merged;
  for (double t : run.crossings.hi) merged.emplace_back(t, run.crossings.hi_level);
  for (double t : run.crossings.lo) merged.emplace_back(t, run.crossings.lo_level);
  std::sort(merged.begin(), merged.end());
  Csv ccsv(ctx.file("crossings.csv"), "t,threshold");
  for (const auto& [t, level] : merged) ccsv.row(t, level);

  const auto epochs = segment_epochs(run.crossings, 0.0, run.span_years, min_gap, false);
  Csv ecsv(ctx.file("epochs.csv"), "kind,start,end,duration");
  for (const auto& e : epochs) ecsv.row(to_string(e.kind), e.start, e.end, e.duration());

  json summary;
  summary["span_years"] = run.span_years;
  summary["year_length"] = year_length(p);
  summary["observable_direction"] = {run.direction[0], run.direction[1], run.direction[2]};
  summary["crossings"] = {{"hi", run.crossings.hi.size()}, {"lo", run.crossings.lo.size()}};
  summary["epochs"] = epochs.size();
  try {
    const auto st = epoch_statistics(epochs, bin_width, cutoff);
    Csv hcsv(ctx.file("histogram.csv"), "length,count");
    write_histogram(hcsv, st.histogram);
    Csv pcsv(ctx.file("pairs.csv"), "first,second");
    for (const auto& [a, b] : st.pairs) pcsv.row(a, b);
    summary["chaotic_epochs"] = st.chaotic;
    summary["mmo_epochs"] = st.mmo;
    summary["longest"] = st.longest;
    summary["rank_correlation"] = st.rank_correlation;
    summary["histogram"] = histogram_json(st.histogram);
  } catch (const Error& e) {
    write_json(ctx.file("summary.json"), summary);
    throw;
  }
  write_json(ctx.file("summary.json"), summary);
}

// ---------------------------------------------------------------- driver

using Command = void (*)(ConfigReader&, RunContext&, const std::string&);

struct Invocation {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int jobs = 0;
};

KeyValues load_any(const std::string& path) {
  if (path.size() > 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    // A manifest from an earlier run.
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Config, "cannot read " + path);
    json doc;
    try {
      in >> doc;
    } catch (const json::exception& e) {
      throw Error(ErrorCode::Config, std::string("bad manifest: ") + e.what());
    }
    if (!doc.contains("config") || !doc["config"].is_object())
      throw Error(ErrorCode::Config, "manifest has no config object");
    KeyValues kv;
    for (const auto& [k, v] : doc["config"].items()) kv[k] = v.get<std::string>();
    return kv;
  }
  return load_config(path);
}

int resolve_jobs(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("JTENSO_JOBS"); env && *env) {
    const auto v = parse_integer(env, "JTENSO_JOBS");
    if (v < 1) throw Error(ErrorCode::Config, "JTENSO_JOBS must be positive");
    return static_cast<int>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int run(const std::string& name, Command cmd, const Invocation& inv) {
  try {
    KeyValues kv;
    if (!inv.config_path.empty()) kv = load_any(inv.config_path);
    for (const auto& o : inv.overrides) {
      const auto eq = o.find('=');
      if (eq == std::string::npos) throw Error(ErrorCode::Config, "--set expects key=value, got '" + o + "'");
      auto one = parse_config(o);
      for (auto& [k, v] : one) kv[k] = v;
    }
    ConfigReader reader(std::move(kv));
    RunContext ctx;
    ctx.command = name;
    ctx.jobs = resolve_jobs(inv.jobs);
    cmd(reader, ctx, inv.out_dir);
    ctx.write_manifest(reader.resolved());
    std::cout << name << ": wrote " << ctx.outputs.size() << " artifacts to " << ctx.out_dir.string() << '\n';
    return kOk;
  } catch (const Error& e) {
    std::cerr << name << ": " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << '\n';
    return kNumericsError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ENSO recharge-oscillator toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"simulate", "Integrate one trajectory and record section crossings", cmd_simulate},
      {"map1d", "Iterate the cubic interval map and collect sign-epoch statistics", cmd_map1d},
      {"basin", "Label a grid of initial conditions by attractor", cmd_basin},
      {"ftle", "Finite-time Lyapunov exponents on a section grid", cmd_ftle},
      {"returnmap", "Periodic orbit, 1-D return map and stretching profile", cmd_returnmap},
      {"crisis", "Bisect the chaotic and MMO crisis values of a", cmd_crisis},
      {"strip", "Crisis values of a over a list of delta", cmd_strip},
      {"epochs", "Forced run, threshold crossings and epoch statistics", cmd_epochs},
  };

  Invocation inv;
  std::vector<std::pair<CLI::App*, std::pair<std::string, Command>>> subs;
  for (const auto& [name, help, cmd] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("-c,--config", inv.config_path, "key = value config file, or a manifest.json")
        ->check(CLI::ExistingFile);
    sub->add_option("-s,--set", inv.overrides, "Override one key (key=value); repeatable");
    sub->add_option("-o,--out", inv.out_dir, "Output directory (overrides JTENSO_OUTPUT_DIR and output_dir)");
    sub->add_option("-j,--jobs", inv.jobs, "Worker threads (default: JTENSO_JOBS or all cores)")
        ->check(CLI::PositiveNumber);
    subs.push_back({sub, {name, cmd}});
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }
  for (const auto& [sub, named] : subs)
    if (sub->parsed()) return run(named.first, named.second, inv);
  return kConfigError;
}
