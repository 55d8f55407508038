#include <doctest.h>

#include <cmath>

#include "jtenso/analysis.hpp"
#include "jtenso/error.hpp"
#include "oracles.hpp"

using namespace jtenso;
using doctest::Approx;

TEST_SUITE("analysis") {

TEST_CASE("FTLE at the equilibrium is the linear-flow stretch") {
  const auto p = ModelParams::reference();
  const auto eq = saddle_focus(p);
  const JtField field(p);
  for (double t : {0.0, 2.0, 6.0}) {
    const double expected = std::log10(oracle::max_singular(oracle::expm(oracle::scaled(jacobian(eq.state, p), t))));
    CHECK(ftle(field, eq.state, t) == Approx(expected).epsilon(1e-6).scale(1.0));
  }
  CHECK(default_ftle_horizon(p) == Approx(5.0 / p.delta));
}

TEST_CASE("bisection on a flag") {
  int calls = 0;
  const auto r = bisect_flag(0.0, 1.0, 1e-6, [&](double x) {
    ++calls;
    return x > 0.3;
  });
  CHECK(r.critical == Approx(0.3).epsilon(1e-6));
  CHECK(r.hi - r.lo <= 1e-6);
  CHECK(r.hi - r.lo == Approx(std::ldexp(1.0, -r.iterations)).epsilon(1e-12));
  CHECK(r.iterations == 20);
  CHECK(calls == r.iterations + 2);
  CHECK_FALSE(r.flag_lo);
  CHECK(r.flag_hi);
  try {
    bisect_flag(0.0, 1.0, 1e-6, [](double) { return true; });
    FAIL("bracket without a sign change accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidBracket);
  }
  CHECK_THROWS_AS(bisect_flag(1.0, 0.0, 1e-6, [](double x) { return x > 0.5; }), Error);
}

TEST_CASE("bistability at the reference parameters") {
  const auto p = ModelParams::reference();
  const auto eq = saddle_focus(p);
  const JtField field(p);
  ClassifyOptions opts;
  opts.early_exit = false;
  opts.window = 1000.0;

  const auto mmo = classify_attractor(field, mmo_seed(), eq, opts);
  CHECK(mmo.kind == AttractorKind::MMO);
  CHECK(mmo.max_x > -1.5);

  const auto chaos = classify_attractor(field, chaotic_seed(eq), eq, opts);
  CHECK(chaos.kind == AttractorKind::Chaotic);
  CHECK(chaos.max_x < -1.5);
  CHECK(chaos.strong_events == 0);
}

TEST_CASE("a periodic orbit and a chaotic attractor at a = 7.453") {
  const auto p = ModelParams::reference().with_a(7.453);
  const auto eq = saddle_focus(p);
  CHECK(eq.state[0] == Approx(-2.486039).epsilon(1e-6));
  const JtField field(p);
  ClassifyOptions opts;
  opts.early_exit = false;
  const auto periodic = classify_attractor(field, {eq.state[0], -0.917139, 1.650843}, eq, opts);
  CHECK(periodic.kind == AttractorKind::PeriodicNonMMO);
  CHECK(periodic.period >= 1);
  const auto chaos = classify_attractor(field, {eq.state[0], -0.9264, 1.6423}, eq, opts);
  CHECK(chaos.kind == AttractorKind::Chaotic);
}

TEST_CASE("a small window around the MMO attractor is uniform") {
  // The basins interleave down to fine scales almost everywhere; only a
  // neighbourhood of the stable orbit itself is reliably one-coloured.
  const auto p = ModelParams::reference();
  const auto eq = saddle_focus(p);
  GridSpec grid;
  grid.plane = {Axis::X, eq.state[0], Direction::Increasing};
  grid.u_min = -0.85639;
  grid.u_max = -0.85619;
  grid.v_min = 1.65262;
  grid.v_max = 1.65282;
  grid.nu = grid.nv = 3;
  const auto b = basin_grid(JtField(p), grid);
  CHECK(b.count(AttractorKind::MMO) == 9);
  CHECK(b.boundary_cells() == 0);
}

TEST_CASE("basin bookkeeping") {
  BasinGrid b;
  b.grid.nu = 3;
  b.grid.nv = 2;
  using K = AttractorKind;
  b.labels = {K::MMO, K::MMO, K::Chaotic, K::MMO, K::MMO, K::MMO};
  CHECK(b.count(K::MMO) == 5);
  CHECK(b.count(K::Chaotic) == 1);
  CHECK(b.at(2, 0) == K::Chaotic);
  // The chaotic cell and its two 4-neighbours.
  CHECK(b.boundary_cells() == 3);
  CHECK(label_code(K::MMO) != label_code(K::Chaotic));
  CHECK(label_code(K::Undecided) == 'U');
}

TEST_CASE("grid geometry") {
  GridSpec g;
  g.plane = {Axis::X, -2.0, Direction::Increasing};
  g.u_min = -1.0;
  g.u_max = 1.0;
  g.v_min = 0.5;
  g.v_max = 1.5;
  g.nu = 5;
  g.nv = 3;
  CHECK(g.u(0) == -1.0);
  CHECK(g.u(4) == 1.0);
  CHECK(g.v(1) == 1.0);
  CHECK(g.point(2, 2) == State{-2.0, 0.0, 1.5});
  g.nu = 0;
  CHECK_THROWS_AS(g.validate(), Error);
}

}
