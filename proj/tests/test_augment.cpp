#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cody/augment.hpp"
#include "cody/rng.hpp"

using cody::AugmentSpec;
using cody::ObsBatch;
using cody::Rng;
using cody::ShiftOffset;

namespace {

ObsBatch blank_batch(int n, int c, int hw) {
  ObsBatch b;
  b.resize(n, c, hw, hw);
  return b;
}

}  // namespace

TEST_CASE("max_shift 0 is the identity") {
  Rng rng(1);
  ObsBatch b = blank_batch(3, 6, 12);
  for (auto& p : b.pixels) p = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  AugmentSpec spec{0};
  const ObsBatch out = cody::random_shift(b, spec, rng);
  REQUIRE(out.pixels == b.pixels);

  const auto [v1, v2] = cody::two_views(b, spec, rng);
  REQUIRE(v1.pixels == b.pixels);
  REQUIRE(v2.pixels == b.pixels);
}

TEST_CASE("a forced (+2,0) offset moves a center pixel two columns right") {
  ObsBatch b = blank_batch(1, 3, 15);
  b.at(0, 0, 7, 7) = 255;
  b.at(0, 1, 7, 7) = 255;
  b.at(0, 2, 7, 7) = 255;
  const ObsBatch out = cody::shift_batch(b, {ShiftOffset{2, 0}});
  REQUIRE(out.at(0, 0, 7, 9) == 255);
  REQUIRE(out.at(0, 0, 7, 7) == 0);
}

TEST_CASE("shape is preserved for every call") {
  Rng rng(5);
  ObsBatch b = blank_batch(4, 9, 21);
  AugmentSpec spec{4};
  const ObsBatch out = cody::random_shift(b, spec, rng);
  REQUIRE(out.n == b.n);
  REQUIRE(out.channels == b.channels);
  REQUIRE(out.height == b.height);
  REQUIRE(out.width == b.width);
}

TEST_CASE("edge-replicate padding fills uncovered pixels from the border") {
  ObsBatch b = blank_batch(1, 3, 8);
  // Distinct column pattern.
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) b.at(0, 0, y, x) = static_cast<std::uint8_t>(10 * x);
  const ObsBatch out = cody::shift_batch(b, {ShiftOffset{3, 0}});
  // Content moved right by 3: leftmost 3 columns replicate the old column 0.
  for (int x = 0; x < 3; ++x) REQUIRE(out.at(0, 0, 4, x) == 0);
  for (int x = 3; x < 8; ++x) REQUIRE(out.at(0, 0, 4, x) == 10 * (x - 3));
}

TEST_CASE("all stacked frames of a row share one offset (marker pixels)") {
  Rng rng(23);
  AugmentSpec spec{4};
  ObsBatch b = blank_batch(6, 9, 21);
  for (int ni = 0; ni < 6; ++ni)
    for (int c = 0; c < 9; ++c) b.at(ni, c, 10, 10) = 255;
  std::vector<ShiftOffset> offsets;
  const ObsBatch out = cody::random_shift(b, spec, rng, &offsets);
  for (int ni = 0; ni < 6; ++ni)
    for (int c = 0; c < 9; ++c) {
      REQUIRE(out.at(ni, c, 10 + offsets[static_cast<std::size_t>(ni)].dy,
                     10 + offsets[static_cast<std::size_t>(ni)].dx) == 255);
    }
}

TEST_CASE("interior pixel multiset is preserved by pure translation") {
  Rng rng(3);
  ObsBatch b = blank_batch(1, 3, 16);
  // Content confined to the interior so no replication is involved.
  for (int y = 5; y < 11; ++y)
    for (int x = 5; x < 11; ++x) b.at(0, 0, y, x) = static_cast<std::uint8_t>(y * 16 + x);
  const ObsBatch out = cody::shift_batch(b, {ShiftOffset{-2, 3}});
  std::vector<int> in_vals, out_vals;
  for (int y = 5; y < 11; ++y)
    for (int x = 5; x < 11; ++x) in_vals.push_back(b.at(0, 0, y, x));
  for (int y = 5 + 3; y < 11 + 3; ++y)
    for (int x = 5 - 2; x < 11 - 2; ++x) out_vals.push_back(out.at(0, 0, y, x));
  REQUIRE(in_vals == out_vals);
}

TEST_CASE("offset distribution is uniform on the (2m+1)^2 grid within 5 sigma") {
  Rng rng(777);
  AugmentSpec spec{4};
  const int draws = 100000;
  std::vector<int> counts(81, 0);
  const auto offs = cody::draw_offsets(draws, spec, rng);
  for (const auto& o : offs) counts[static_cast<std::size_t>((o.dy + 4) * 9 + (o.dx + 4))]++;
  const double p = 1.0 / 81.0;
  const double expect = draws * p;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (int c : counts) REQUIRE(std::abs(c - expect) < 5.0 * sigma);
}

TEST_CASE("two_views offsets are draw-independent (correlation within 5 sigma of 0)") {
  Rng rng(31337);
  AugmentSpec spec{4};
  const int n = 10000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const auto o1 = cody::draw_offsets(1, spec, rng);
    const auto o2 = cody::draw_offsets(1, spec, rng);
    const double a = o1[0].dx, b = o2[0].dx;
    sx += a;
    sy += b;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
  }
  const double cov = sxy / n - (sx / n) * (sy / n);
  const double va = sxx / n - (sx / n) * (sx / n);
  const double vb = syy / n - (sy / n) * (sy / n);
  const double corr = cov / std::sqrt(va * vb);
  REQUIRE(std::abs(corr) < 5.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("augmenting with identical rng states gives identical views") {
  ObsBatch b = blank_batch(2, 3, 12);
  for (std::size_t i = 0; i < b.pixels.size(); ++i) b.pixels[i] = static_cast<std::uint8_t>(i);
  AugmentSpec spec{4};
  Rng r1(5), r2(5);
  const ObsBatch v1 = cody::random_shift(b, spec, r1);
  const ObsBatch v2 = cody::random_shift(b, spec, r2);
  REQUIRE(v1.pixels == v2.pixels);
}

TEST_CASE("image smaller than the shift window is rejected") {
  Rng rng(1);
  ObsBatch b = blank_batch(1, 3, 7);
  AugmentSpec spec{4};  // needs >= 9
  REQUIRE_THROWS_AS(cody::random_shift(b, spec, rng), cody::ShapeError);
}
