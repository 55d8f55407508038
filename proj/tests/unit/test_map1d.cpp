#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "jtenso/error.hpp"
#include "jtenso/map1d.hpp"
#include "jtenso/stats.hpp"

using namespace jtenso;
using doctest::Approx;

TEST_SUITE("stats") {

TEST_CASE("linear fit") {
  const auto f = linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == Approx(2.0));
  CHECK(f.intercept == Approx(1.0));
  CHECK(f.r_squared == Approx(1.0));
  const auto g = linear_fit({0, 1, 2, 3}, {0, 1, 0, 1});
  CHECK(g.r_squared < 0.5);
}

TEST_CASE("rank correlation") {
  std::vector<double> x{1, 2, 3, 4, 5, 6}, cube, rev;
  for (double v : x) {
    cube.push_back(v * v * v);
    rev.push_back(-v);
  }
  CHECK(spearman(x, cube) == Approx(1.0));
  CHECK(spearman(x, rev) == Approx(-1.0));
  CHECK(spearman(x, std::vector<double>(6, 2.0)) == 0.0);
  // Ties take average ranks: ranks (1.5,1.5,3) against (1,2,3).
  CHECK(spearman({1, 1, 2}, {1, 2, 3}) == Approx(std::sqrt(0.75)));
}

TEST_CASE("two-sample KS") {
  std::vector<double> a{1, 2, 3, 4, 5}, b{10, 11, 12, 13, 14};
  CHECK(ks_two_sample(a, a).statistic == 0.0);
  CHECK(ks_two_sample(a, a).p_value == Approx(1.0));
  CHECK(ks_two_sample(a, b).statistic == 1.0);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> x(2000), y(2000), z(2000);
  for (auto& v : x) v = n(rng);
  for (auto& v : y) v = n(rng);
  for (auto& v : z) v = n(rng) + 0.5;
  CHECK(ks_two_sample(x, y).p_value > 0.01);
  CHECK(ks_two_sample(x, z).p_value < 1e-6);
}

TEST_CASE("histogram") {
  const auto h = make_histogram({0.5, 1.5, 1.7, 9.9, 12.0}, 2.0, 0.0, 10.0);
  REQUIRE(h.counts.size() == 5);
  CHECK(h.counts[0] == 3);
  CHECK(h.counts[4] == 1);
  CHECK(h.occupied() == 2);
  CHECK(h.centre(1) == 3.0);
}

}

TEST_SUITE("map1d") {

TEST_CASE("map values") {
  CHECK(cubic_map(0.0, 2.6) == 0.0);
  CHECK(cubic_map(1.0, 2.6) == 0.0);
  CHECK(cubic_map(-1.0, 2.6) == 0.0);
  const double peak = 1.0 / std::sqrt(3.0);
  CHECK(cubic_map(peak, 2.6) == Approx(2.6 * 2.0 / (3.0 * std::sqrt(3.0))).epsilon(1e-15));
  CHECK(cubic_map(peak, 2.6) == Approx(1.00074).epsilon(1e-5));
  CHECK(cubic_map(peak, kCubicMergeAlpha) == Approx(1.0).epsilon(1e-15));
  // Second iterate dips below zero near the peak preimage.
  CHECK(cubic_map(cubic_map(peak, 2.6), 2.6) < 0.0);
}

TEST_CASE("orbits and epochs") {
  SUBCASE("zero is fixed") {
    const auto o = iterate(0.0, 50, 2.6);
    CHECK(std::all_of(o.values.begin(), o.values.end(), [](double v) { return v == 0.0; }));
  }

  SUBCASE("an orbit through an exact zero is rejected") {
    const auto o = iterate(1.0, 5, 2.6);
    CHECK_THROWS_AS(epochs_by_sign(o), Error);
  }

  SUBCASE("below the merge threshold the orbit keeps its sign") {
    for (double x0 : {0.05, 0.3, 0.9}) {
      const auto o = iterate(x0, 10000, 2.55);
      const auto e = epochs_by_sign(o);
      REQUIRE(e.size() == 1);
      CHECK(e[0].length == 10001);
      CHECK(e[0].sign == 1);
    }
  }

  SUBCASE("epochs partition the orbit with alternating signs") {
    const auto o = iterate(0.2, 20000, 2.6);
    CHECK(o.values.size() == 20001);
    CHECK(o.values[0] == 0.2);
    const auto e = epochs_by_sign(o);
    long total = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      CHECK(e[i].length >= 1);
      CHECK(e[i].start_index == total);
      total += e[i].length;
      if (i) CHECK(e[i].sign == -e[i - 1].sign);
    }
    CHECK(total == 20001);
    CHECK(iterate(0.2, 20000, 2.6).values == o.values);
  }

  SUBCASE("a single epoch fills one bin") {
    const std::vector<EpochRecord> one{{0, 7, 1}};
    const auto h = epoch_histogram(one);
    CHECK(h.occupied() == 1);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == 1);
  }

  SUBCASE("two epochs give exactly one pair") {
    const std::vector<EpochRecord> two{{0, 8, 1}, {8, 9, -1}};
    const auto pc = pair_coverage(two, 8, 60);
    REQUIRE(pc.counts.size() == 1);
    CHECK(pc.counts.begin()->first == std::pair<long, long>{8, 9});
  }
}

TEST_CASE("geometric lengths give the expected log slope") {
  std::mt19937_64 rng(99);
  const double r = 0.9;
  std::geometric_distribution<long> geo(1.0 - r);
  std::vector<EpochRecord> epochs;
  for (int i = 0; i < 200000; ++i) epochs.push_back({0, 1 + geo(rng), i % 2 ? -1 : 1});
  const auto h = epoch_histogram(epochs);
  // Fit over the well-populated head to keep the sparse tail out.
  std::vector<double> x, y;
  for (std::size_t i = 0; i < h.counts.size() && h.counts[i] >= 50; ++i) {
    x.push_back(h.centre(i));
    y.push_back(std::log(static_cast<double>(h.counts[i])));
  }
  CHECK(linear_fit(x, y).slope == Approx(std::log(r)).epsilon(0.05));
}

TEST_CASE("reference orbit statistics") {
  const auto o = iterate(0.2, 1'000'000, 2.6);
  const auto e = epochs_by_sign(o);
  const auto lengths = epoch_lengths(e);
  // The first and last epochs are cut by the ends of the orbit.
  const double lo = *std::min_element(lengths.begin() + 1, lengths.end() - 1);
  const double hi = *std::max_element(lengths.begin() + 1, lengths.end() - 1);
  CHECK(lo == 8);
  CHECK(hi >= 400);
  CHECK(hi <= 900);
  CHECK(epoch_histogram(e).log_fit.r_squared > 0.9);
}

TEST_CASE("noisy map keeps the deterministic epoch scale") {
  // A two-sample KS test separates these at this sample size: the noise
  // flicks the orbit across 0 near the attractor's lower edge and adds a
  // population of very short epochs. Mean length and exponential tail agree.
  const auto det = epochs_by_sign(iterate(0.2, 1'000'000, 2.6));
  const auto noisy = epochs_by_sign(iterate(0.2, 1'000'000, 2.595, MapNoise{0.005, 11}));
  const auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin() + 1, v.end() - 1, 0.0) / static_cast<double>(v.size() - 2);
  };
  CHECK(mean(epoch_lengths(noisy)) == Approx(mean(epoch_lengths(det))).epsilon(0.05));
  CHECK(epoch_histogram(noisy).log_fit.slope == Approx(epoch_histogram(det).log_fit.slope).epsilon(0.2));
  CHECK(iterate(0.2, 1000, 2.595, MapNoise{0.005, 11}).values == iterate(0.2, 1000, 2.595, MapNoise{0.005, 11}).values);
}

}
