#include <catch2/catch_amalgamated.hpp>
#include <sstream>

#include "cody/rng.hpp"

using cody::Rng;

TEST_CASE("substreams are independent of each other") {
  Rng a = Rng::substream(42, "env");
  Rng b = Rng::substream(42, "augment");
  REQUIRE(a.bits() != b.bits());

  // Consuming from one stream does not shift another.
  Rng a2 = Rng::substream(42, "env");
  Rng b2 = Rng::substream(42, "augment");
  (void)b2.bits();
  REQUIRE(a2.bits() == Rng::substream(42, "env").bits());
}

TEST_CASE("same seed, same draws") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) REQUIRE(a.uniform() == b.uniform());
  for (int i = 0; i < 100; ++i) REQUIRE(a.normal() == b.normal());
}

TEST_CASE("uniform_int covers the range inclusively") {
  Rng r(5);
  bool saw_lo = false, saw_hi = false;
  for (int i = 0; i < 10000; ++i) {
    const int v = r.uniform_int(-4, 4);
    REQUIRE(v >= -4);
    REQUIRE(v <= 4);
    saw_lo |= v == -4;
    saw_hi |= v == 4;
  }
  REQUIRE(saw_lo);
  REQUIRE(saw_hi);
}

TEST_CASE("normal moments look standard") {
  Rng r(9);
  const int n = 200000;
  double sum = 0, sq = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  REQUIRE(std::abs(mean) < 0.02);
  REQUIRE(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("state round-trips through serialization") {
  Rng a(77);
  for (int i = 0; i < 13; ++i) (void)a.uniform();
  std::stringstream ss;
  a.save(ss);
  Rng b;
  b.load(ss);
  for (int i = 0; i < 50; ++i) REQUIRE(a.bits() == b.bits());
}
