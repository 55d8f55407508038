#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "jtenso/error.hpp"
#include "jtenso/model.hpp"

using namespace jtenso;
using doctest::Approx;

TEST_SUITE("model") {

TEST_CASE("vector field matches a direct evaluation at (-1, -1, 1)") {
  const auto p = ModelParams::reference();
  const auto v = vector_field({-1.0, -1.0, 1.0}, p);
  // tanh(x + z) = tanh(0) = 0, so every term is polynomial.
  const double rd = p.rho * p.delta;
  CHECK(v[0] == Approx(rd * (1.0 + p.a) - (p.c - 2.0)).epsilon(1e-14));
  CHECK(v[1] == Approx(-rd * (1.0 - p.a)).epsilon(1e-14));
  CHECK(v[2] == Approx(p.delta * (p.k - 0.5)).epsilon(1e-14));
  CHECK(v[0] == Approx(0.21485).epsilon(1e-4));
  CHECK(v[1] == Approx(0.46470).epsilon(1e-4));
  CHECK(v[2] == Approx(-0.021822).epsilon(1e-4));
}

TEST_CASE("(0, 0, k) is an equilibrium") {
  const auto p = ModelParams::reference();
  const auto v = vector_field({0.0, 0.0, p.k}, p);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 0.0);
  CHECK(v[2] == 0.0);
}

TEST_CASE("x' vanishes identically on the plane x = 0") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0), pos(0.05, 2.0);
  for (int i = 0; i < 1000; ++i) {
    ModelParams p{pos(rng), pos(rng), u(rng), u(rng), u(rng)};
    const State s{0.0, u(rng), u(rng)};
    CHECK(vector_field(s, p)[0] == 0.0);
    const auto j = jacobian(s, p);
    CHECK(j[0][1] == 0.0);
    CHECK(j[0][2] == 0.0);
  }
}

TEST_CASE("Jacobian at (0, 0, k) is lower triangular with the expected diagonal") {
  const auto p = ModelParams::reference();
  const auto j = jacobian({0.0, 0.0, p.k}, p);
  const double rd = p.rho * p.delta;
  CHECK(j[0][0] == Approx(p.c * (1.0 - std::tanh(p.k)) - rd * p.a).epsilon(1e-14));
  CHECK(j[1][1] == Approx(-rd * p.a).epsilon(1e-14));
  CHECK(j[2][2] == Approx(-p.delta).epsilon(1e-14));
  auto ev = eigenvalues(j);
  std::vector<double> re;
  for (auto& e : ev) {
    CHECK(std::abs(e.imag()) < 1e-12);
    re.push_back(e.real());
  }
  std::sort(re.begin(), re.end());
  CHECK(re[0] == Approx(-0.5374).epsilon(1e-3));
  CHECK(re[1] == Approx(-0.2254).epsilon(1e-3));
  CHECK(re[2] == Approx(0.9416).epsilon(1e-3));
}

TEST_CASE("Jacobian matches central finite differences on random states") {
  const auto p = ModelParams::reference();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  const double h = 1e-6;
  for (int n = 0; n < 100; ++n) {
    const State s{u(rng), u(rng), u(rng)};
    const auto j = jacobian(s, p);
    for (int c = 0; c < 3; ++c) {
      State sp = s, sm = s;
      sp[c] += h;
      sm[c] -= h;
      const auto fp = vector_field(sp, p), fm = vector_field(sm, p);
      for (int r = 0; r < 3; ++r) {
        const double fd = (fp[r] - fm[r]) / (2.0 * h);
        CHECK(std::abs(fd - j[r][c]) <= 1e-6 * std::max(1.0, std::abs(j[r][c])));
      }
    }
  }
}

TEST_CASE("saddle focus at the reference parameters") {
  const auto p = ModelParams::reference();
  const auto eq = find_equilibrium(p, {-2.5, -0.8, 1.6});
  const double x = eq.state[0];
  CHECK(x == Approx(-2.4839).epsilon(1e-3 / 2.4839));
  // y' = 0 and z' = 0 solved by hand.
  CHECK(eq.state[1] == Approx(-x * x / p.a).epsilon(1e-12));
  CHECK(eq.state[2] == Approx(p.k - x / 2.0).epsilon(1e-12));
  CHECK(eq.residual < 1e-12);

  SUBCASE("Newton from the root stays put") {
    const auto again = find_equilibrium(p, eq.state);
    CHECK(again.iterations <= 1);
    CHECK(norm(again.state - eq.state) < 1e-14);
  }

  SUBCASE("eigenstructure") {
    auto full = eq;
    equilibrium_eigenstructure(full, p);
    CHECK(full.saddle_focus);
    const auto slow = slow_time_eigenvalues(full, p);
    CHECK(slow[0].real() == Approx(-1.46).epsilon(0.01));
    CHECK(slow[1].real() == Approx(0.127).epsilon(0.01));
    CHECK(slow[1].imag() == Approx(4.47).epsilon(0.01));
    CHECK(slow[2] == std::conj(slow[1]));
    const auto& d = full.observable_direction;
    CHECK(norm(d) == Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(dot(d, full.plane_u)) < 1e-8);
    CHECK(std::abs(dot(d, full.plane_v)) < 1e-8);
    CHECK(d[0] == Approx(-0.0303).epsilon(0.01 / 0.0303));
    CHECK(d[1] == Approx(0.3600).epsilon(0.01 / 0.36));
    CHECK(d[2] == Approx(0.9325).epsilon(0.01 / 0.9325));
    const auto lambda = full.eigenvalues[1];
    CHECK(growth_per_revolution(full) ==
          Approx(std::exp(2.0 * std::numbers::pi * lambda.real() / lambda.imag())).epsilon(1e-14));
    CHECK(growth_per_revolution(full) == Approx(1.2).epsilon(0.01));
  }
}

TEST_CASE("Newton from near the origin finds (0, 0, k)") {
  const auto p = ModelParams::reference();
  const auto eq = find_equilibrium(p, {0.1, 0.1, 0.4});
  CHECK(std::abs(eq.state[0]) < 1e-12);
  CHECK(std::abs(eq.state[1]) < 1e-12);
  CHECK(eq.state[2] == Approx(p.k).epsilon(1e-12));
}

TEST_CASE("annual forcing") {
  Forcing f;
  f.a0 = 7.3939;
  CHECK(a_of_t(0.0, f) == 7.3939);
  CHECK(a_of_t(123.4, f) == 7.3939);
  f.amplitude = 0.002;
  CHECK(a_of_t(0.0, f) == 7.3939);
  CHECK(a_of_t(std::numbers::pi / (2.0 * 1.8), f) == Approx(7.3959).epsilon(1e-14));

  SUBCASE("zero amplitude reduces exactly to the autonomous field") {
    const auto p = ModelParams::reference();
    Forcing off;
    off.a0 = p.a;
    const JtField autonomous(p), forced(p, off);
    const State s{-1.7, -0.4, 1.2};
    for (double t : {0.0, 1.0, 77.7}) CHECK(forced(t, s) == autonomous(t, s));
  }

  SUBCASE("one forcing period is one year") {
    const auto p = ModelParams::reference();
    const JtField field(p, f);
    const State s{-1.7, -0.4, 1.2};
    const double year = year_length(p);
    CHECK(year == Approx(2.0 * std::numbers::pi / (1.8 * p.delta)).epsilon(1e-15));
    const auto a = field(0.3, s), b = field(0.3 + year, s);
    for (int i = 0; i < 3; ++i) CHECK(a[i] == Approx(b[i]).epsilon(1e-12));
    CHECK(to_years(from_years(12.5, p), p) == Approx(12.5).epsilon(1e-15));
  }

  SUBCASE("validation") {
    Forcing bad = f;
    bad.amplitude = -1.0;
    CHECK_THROWS_AS(bad.validate(), Error);
    ModelParams q;
    q.delta = 0.0;
    CHECK_THROWS_AS(q.validate(), Error);
  }
}

}
