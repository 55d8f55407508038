// Acceptance run: one line per criterion, nonzero exit when any fails.
// The default tier is what ctest runs; --slow adds the full-scale checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "jtenso/analysis.hpp"
#include "jtenso/epochs.hpp"
#include "jtenso/map1d.hpp"
#include "jtenso/orbits.hpp"
#include "jtenso/variational.hpp"

using namespace jtenso;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  bool slow;
  std::function<Outcome()> run;
};

/// Accumulates sub-checks into one verdict and a readable detail line.
class Verdict {
 public:
  Verdict& check(bool ok, const std::string& what) {
    pass_ = pass_ && ok;
    detail_ << (first_ ? "" : "; ") << (ok ? "" : "NOT ") << what;
    first_ = false;
    return *this;
  }
  Outcome done() const { return {pass_, detail_.str()}; }

 private:
  bool pass_ = true;
  bool first_ = true;
  std::ostringstream detail_;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

const ModelParams kRef = ModelParams::reference();

Outcome equilibrium() {
  auto eq = find_equilibrium(kRef, {-2.5, -0.8, 1.6});
  equilibrium_eigenstructure(eq, kRef);
  const auto slow = slow_time_eigenvalues(eq, kRef);
  const auto& d = eq.observable_direction;
  const auto near = [](double got, double want, double rel) { return std::abs(got - want) <= rel * std::abs(want); };
  Verdict v;
  v.check(std::abs(eq.state[0] + 2.4839) < 1e-3, "x_eq " + fmt("%.6f", eq.state[0]));
  v.check(near(slow[0].real(), -1.46, 0.01), "real eigenvalue " + fmt("%.4f", slow[0].real()));
  v.check(near(slow[1].real(), 0.127, 0.01) && near(std::abs(slow[1].imag()), 4.47, 0.01),
          "complex pair " + fmt("%.4f", slow[1].real()) + " ± " + fmt("%.4fi", std::abs(slow[1].imag())));
  v.check(std::abs(d[0] + 0.0303) < 0.01 && std::abs(d[1] - 0.36) < 0.01 && std::abs(d[2] - 0.9325) < 0.01,
          "direction (" + fmt("%.4f", d[0]) + ", " + fmt("%.4f", d[1]) + ", " + fmt("%.4f", d[2]) + ")");
  return v.done();
}

Outcome bistability() {
  const auto eq = saddle_focus(kRef);
  const JtField field(kRef);
  ClassifyOptions opts;
  opts.early_exit = false;
  opts.window = 1000.0;
  const auto mmo = classify_attractor(field, mmo_seed(), eq, opts);
  const auto chaos = classify_attractor(field, chaotic_seed(eq), eq, opts);

  CrossingOptions co;
  co.t_start = 500.0;
  co.t_max = 3000.0;
  const auto events = detect_crossings(field, mmo_seed(), event_section(), co);
  double period = 0.0;
  if (events.size() >= 2) period = to_years((events.back().t - events.front().t) / (events.size() - 1), kRef);

  Verdict v;
  v.check(mmo.kind == AttractorKind::MMO, std::string("first seed ") + to_string(mmo.kind));
  v.check(std::abs(period - 12.1) <= 0.05 * 12.1, "inter-event period " + fmt("%.3f", period) + " years");
  v.check(chaos.kind == AttractorKind::Chaotic, std::string("second seed ") + to_string(chaos.kind));
  v.check(chaos.max_x < -1.5, "max x " + fmt("%.4f", chaos.max_x) + " over 1000 units");
  return v.done();
}

Outcome fixed_point() {
  const auto orbit = newton_periodic(JtField(kRef), event_section(), 1, {-1.5, -0.07566, 0.83542});
  const auto& q = orbit.section_point;
  const double mu = orbit.multipliers[0].real();
  Verdict v;
  v.check(std::abs(q[1] + 0.07566) < 1e-3 && std::abs(q[2] - 0.83542) < 1e-3,
          "p = (" + fmt("%.5f", q[1]) + ", " + fmt("%.5f", q[2]) + ")");
  v.check(std::abs(orbit.multipliers[0].imag()) < 1e-12 && std::abs(mu + 1.245) <= 0.02 * 1.245,
          "dominant multiplier " + fmt("%.4f", mu));
  v.check(std::abs(orbit.multipliers[1]) < 1e-5, "secondary |mu| " + fmt("%.1e", std::abs(orbit.multipliers[1])));
  return v.done();
}

Outcome return_map_regimes() {
  const auto before = mmo_return_map(kRef);
  const auto after = mmo_return_map(kRef.with_a(7.3956));
  Verdict v;
  v.check(before.maps_into(0.835, 0.837), "a=7.3939 maps [0.835, 0.837] into itself");
  v.check(after.horseshoe(), "a=7.3956 horseshoe (image of minimum " +
                                 fmt("%.5f", after.image_of_minimum().value_or(NAN)) + ")");
  return v.done();
}

Outcome crisis() {
  const auto chaotic = crisis_bisection(kRef, 7.3930, 7.3945, 1e-6);
  const auto sn = saddle_node(kRef, 7.3915, 7.3939, 1e-5);
  Verdict v;
  v.check(std::abs(chaotic.critical - 7.39386) <= 5e-4, "a* = " + fmt("%.7f", chaotic.critical));
  v.check(sn.critical > 7.3915 && sn.critical < 7.3939, "saddle-node at " + fmt("%.6f", sn.critical));
  return v.done();
}

Outcome stretching() {
  const auto eq = saddle_focus(kRef);
  const JtField field(kRef);
  const auto ridge = ridge_section(eq);
  const auto profile =
      return_profile(field, ridge, 3, ridge.embed(-0.7835, 1.6195), ridge.embed(-0.7485, 1.6195), 351);
  Verdict v;
  if (profile.empty()) return v.check(false, "no returns along the strip").done();
  const auto peak = peak_stretch(profile);
  const double len = image_length(field, ridge, 3, profile[peak.index].input, {1.0, 0.0}, 5e-4, 100);
  v.check(peak.stretch >= 100.0, "ridge-flank y-stretch " + fmt("%.1f", peak.stretch));
  v.check(len > 0.4, "5e-4 segment image length " + fmt("%.3f", len));
  return v.done();
}

Outcome ftle_contrast_check() {
  const auto eq = saddle_focus(kRef);
  const auto grid = default_ftle_grid(eq);
  const auto f = ftle_grid(JtField(kRef), grid, default_ftle_horizon(kRef));
  const auto c = ftle_contrast(f);
  Verdict v;
  v.check(grid.nu == 50 && grid.nv == 50, "50x50 grid");
  v.check(c.contrast() >= 1.5, "flank max " + fmt("%.2f", c.flank_max) + " vs central median " +
                                    fmt("%.2f", c.central_median));
  return v.done();
}

BasinGrid basin_at(int n) {
  const auto eq = saddle_focus(kRef);
  const JtField field(kRef);
  const auto cfg = classification_config();
  const SectionSpec plane{Axis::X, eq.state[0], Direction::Increasing};
  const auto cloud = attractor_section(field, chaotic_seed(eq), eq, 400, 500.0, cfg);
  return basin_grid(field, window_around(cloud, plane, 0.2, n, n), {}, cfg);
}

Outcome basins(const std::vector<int>& sizes) {
  Verdict v;
  std::size_t prev = 0;
  for (int n : sizes) {
    const auto b = basin_at(n);
    const auto m = b.count(AttractorKind::MMO), c = b.count(AttractorKind::Chaotic), e = b.boundary_cells();
    v.check(m > 0 && c > 0, std::to_string(n) + "²: M " + std::to_string(m) + " C " + std::to_string(c) +
                                " boundary " + std::to_string(e));
    if (prev) {
      const double ratio = static_cast<double>(e) / static_cast<double>(prev);
      v.check(ratio > 2.0, "boundary growth x" + fmt("%.2f", ratio) + " per doubling");
    }
    prev = e;
  }
  return v.done();
}

Outcome map_statistics() {
  const auto e6 = epochs_by_sign(iterate(0.2, 1'000'000, 2.6));
  const auto lengths = epoch_lengths(e6);
  const double lo = *std::min_element(lengths.begin() + 1, lengths.end() - 1);
  const double hi = *std::max_element(lengths.begin() + 1, lengths.end() - 1);
  const double r2 = epoch_histogram(e6).log_fit.r_squared;
  const auto e7 = epochs_by_sign(iterate(0.2, 10'000'000, 2.6));
  const double coverage = pair_coverage(e7, 8, 60).coverage;
  Verdict v;
  v.check(lo == 8.0, "min epoch " + fmt("%.0f", lo));
  v.check(hi >= 400.0 && hi <= 900.0, "max epoch " + fmt("%.0f", hi));
  v.check(r2 > 0.9, "log-histogram R² " + fmt("%.3f", r2));
  v.check(coverage >= 0.95, "1e7 pair coverage " + fmt("%.3f", coverage));
  return v.done();
}

struct SwitchingRun {
  EpochStatistics stats;
  std::size_t epochs = 0;
};

SwitchingRun switching_run(const State& s0, double years) {
  Forcing f;
  f.a0 = kRef.a;
  f.amplitude = 0.002;
  ForcedRunOptions opts;
  opts.years = years;
  opts.store_every = 0;
  const auto run = forced_run(kRef, f, s0, opts);
  const auto epochs = segment_epochs(run.crossings, 0.0, run.span_years, 15.0, false);
  return {epoch_statistics(epochs), epochs.size()};
}

Outcome mode_switching() {
  const auto r = switching_run(mmo_seed(), 1e5);
  const auto& s = r.stats;
  Verdict v;
  v.check(s.chaotic >= 10 && s.mmo >= 10,
          std::to_string(s.chaotic) + " chaotic / " + std::to_string(s.mmo) + " MMO epochs in 1e5 years");
  v.check(s.histogram.log_fit.r_squared > 0.8, "log-histogram R² " + fmt("%.3f", s.histogram.log_fit.r_squared));
  v.check(std::abs(s.rank_correlation) < 0.2, "successive rank correlation " + fmt("%.3f", s.rank_correlation));
  // Reported only; the ±20% check on it is in the slow tier.
  v.check(true, "longest " + fmt("%.0f", s.longest) + " years");
  return v.done();
}

Outcome longest_epoch() {
  const auto eq = saddle_focus(kRef);
  Verdict v;
  const std::vector<State> seeds{mmo_seed(), chaotic_seed(eq), eq.state + Vec3{0.0, -0.05, 0.01},
                                 {-1.5, -0.07, 0.836}};
  for (const auto& s0 : seeds) {
    const double longest = switching_run(s0, 1e5).stats.longest;
    v.check(std::abs(longest - 540.0) <= 0.2 * 540.0, "longest " + fmt("%.0f", longest));
  }
  return v.done();
}

Outcome strip() {
  const auto rows = bistability_strip(kRef, {0.225423, 0.2258});
  Verdict v;
  for (const auto& r : rows)
    if (!r.a_chaotic_crisis || !r.a_mmo_crisis) return v.check(false, "row " + fmt("%.6f", r.delta) + " " + r.error).done();
  const double c0 = *rows[0].a_chaotic_crisis, m0 = *rows[0].a_mmo_crisis;
  v.check(c0 < 7.3939 && m0 > 7.3939 && m0 < 7.3956,
          "strip at reference delta [" + fmt("%.6f", c0) + ", " + fmt("%.6f", m0) + "]");
  v.check(m0 - c0 > 0.0 && m0 - c0 < 1e-2, "width " + fmt("%.1e", m0 - c0));
  const double dd = rows[1].delta - rows[0].delta;
  const double sc = (*rows[1].a_chaotic_crisis - c0) / dd, sm = (*rows[1].a_mmo_crisis - m0) / dd;
  v.check(std::isfinite(sc) && std::isfinite(sm) && std::abs(sc - sm) <= 0.25 * std::max(std::abs(sc), std::abs(sm)),
          "boundary slopes " + fmt("%.1f", sc) + " and " + fmt("%.1f", sm));
  return v.done();
}

Outcome hygiene() {
  const JtField field(kRef);
  Verdict v;

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  double worst_fd = 0.0;
  for (int n = 0; n < 100; ++n) {
    const State s{u(rng), u(rng), u(rng)};
    const auto j = jacobian(s, kRef);
    for (int c = 0; c < 3; ++c) {
      State sp = s, sm = s;
      sp[c] += 1e-6;
      sm[c] -= 1e-6;
      const auto fp = vector_field(sp, kRef), fm = vector_field(sm, kRef);
      for (int r = 0; r < 3; ++r)
        worst_fd = std::max(worst_fd, std::abs((fp[r] - fm[r]) / 2e-6 - j[r][c]) / std::max(1.0, std::abs(j[r][c])));
    }
  }
  v.check(worst_fd < 1e-6, "Jacobian vs FD " + fmt("%.1e", worst_fd));

  const auto orbit = newton_periodic(field, event_section(), 1, mmo_seed());
  const auto m = monodromy(field, orbit);
  v.check(m.max_segment_liouville_error < 1e-4,
          "Liouville over " + std::to_string(m.segments) + " segments " + fmt("%.1e", m.max_segment_liouville_error));
  v.check(std::abs(m.multipliers[m.trivial_index] - 1.0) < 1e-3,
          "trivial multiplier " + fmt("%.7f", m.multipliers[m.trivial_index].real()));

  double drift = 0.0;
  IntegratorConfig cfg;
  const auto traj = integrate<3>(field, State{0.0, 0.3, 1.0}, 0.0, 500.0, cfg);
  for (const auto& s : traj.states) drift = std::max(drift, std::abs(s[0]));
  v.check(drift <= cfg.atol, "x=0 drift " + fmt("%.1e", drift));
  return v.done();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria for the jtenso toolkit"};
  bool slow = false;
  std::string only;
  app.add_flag("--slow", slow, "Also run the full-scale tier");
  app.add_option("--only", only, "Run criteria whose name contains this text");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"equilibrium and eigenstructure", 1, false, equilibrium},
      {"bistability", 10, false, bistability},
      {"return-map fixed point", 30, false, fixed_point},
      {"1-D return map regimes", 120, false, return_map_regimes},
      {"boundary crisis", 600, false, crisis},
      {"stretching", 300, false, stretching},
      {"FTLE contrast", 600, false, ftle_contrast_check},
      {"basin structure 125²/250²", 600, false, [] { return basins({125, 250}); }},
      {"1-D map statistics", 60, false, map_statistics},
      {"mode switching", 300, false, mode_switching},
      {"numerical hygiene", 60, false, hygiene},
      {"basin structure 125²/250²/500² (slow)", 3600, true, [] { return basins({125, 250, 500}); }},
      {"longest epoch ~540 years (slow)", 1800, true, longest_epoch},
      {"bistability strip near-parallel boundaries (slow)", 600, true, strip},
  };

  int failed = 0, ran = 0;
  for (const auto& c : criteria) {
    if (c.slow && !slow) continue;
    if (!only.empty() && c.name.find(only) == std::string::npos) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_seconds) {
      o.pass = false;
      o.detail += "; NOT within runtime budget";
    }
    ++ran;
    failed += !o.pass;
    std::printf("[%s] %s: %s (%.1f s / %.0f s)\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), o.detail.c_str(), secs,
                c.budget_seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", ran - failed, ran);
  return failed ? 1 : 0;
}
