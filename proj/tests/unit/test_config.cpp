#include <doctest.h>

#include <bit>
#include <cstdint>
#include <random>

#include "jtenso/config.hpp"
#include "jtenso/error.hpp"

using namespace jtenso;

TEST_SUITE("config") {

TEST_CASE("numbers round-trip bit for bit") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20000; ++i) {
    const double v = std::bit_cast<double>(rng());
    if (!std::isfinite(v)) continue;
    CHECK(std::bit_cast<std::uint64_t>(parse_number(format_number(v))) == std::bit_cast<std::uint64_t>(v));
  }
  for (double v : {0.225423, 0.3224, 2.3952, 0.4032, 7.3939, 0.1 + 0.2, -0.0, 5e-324})
    CHECK(std::bit_cast<std::uint64_t>(parse_number(format_number(v))) == std::bit_cast<std::uint64_t>(v));
}

TEST_CASE("strict parsing") {
  CHECK_THROWS_AS(parse_number("1.5x"), Error);
  CHECK_THROWS_AS(parse_number(""), Error);
  CHECK_THROWS_AS(parse_number("abc"), Error);
  CHECK(parse_number(" 2.5 ") == 2.5);
  CHECK(parse_integer("42") == 42);
  CHECK(parse_integer("1e6") == 1'000'000);
  CHECK_THROWS_AS(parse_integer("2.5"), Error);
}

TEST_CASE("config text") {
  const auto kv = parse_config("# comment\n delta = 0.2254 \n\nseed=7\n");
  CHECK(kv.size() == 2);
  CHECK(kv.at("delta") == "0.2254");
  CHECK(kv.at("seed") == "7");
  CHECK_THROWS_AS(parse_config("delta 0.2"), Error);
  CHECK_THROWS_AS(parse_config("a = 1\na = 2\n"), Error);
  CHECK_THROWS_AS(parse_config(" = 1\n"), Error);
  CHECK(parse_config(dump_config(kv)) == kv);
}

TEST_CASE("reader rejects unknown keys and echoes resolved values") {
  ConfigReader r(parse_config("a = 7.4\nbogus = 1\n"));
  const auto p = read_model(r);
  CHECK(p.a == 7.4);
  CHECK(p.delta == ModelParams::reference().delta);
  try {
    r.finish();
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  CHECK(r.resolved().at("delta") == format_number(0.225423));
  CHECK(r.resolved().count("bogus") == 0);
}

TEST_CASE("model and forcing round-trip through the config") {
  ModelParams p{0.2258, 0.33, 2.4, 0.41, 7.4055};
  Forcing f{7.4055, 0.002, 1.8, 0.001, 99};
  KeyValues kv = to_config(p);
  for (const auto& [k, v] : to_config(f)) kv[k] = v;
  ConfigReader r(kv);
  const auto p2 = read_model(r);
  const auto f2 = read_forcing(r, p2.a);
  r.finish();
  CHECK(p2 == p);
  CHECK(f2 == f);
}

TEST_CASE("invalid values map to config errors") {
  ConfigReader r(parse_config("delta = -1\n"));
  try {
    read_model(r);
    FAIL("negative delta accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
  ConfigReader lists(parse_config("deltas = 0.1, 0.2,0.3\nflag = yes\n"));
  CHECK(lists.numbers("deltas", {}) == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(lists.flag("flag", false));
  CHECK_NOTHROW(lists.finish());
}

}
