#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "cody/config.hpp"
#include "cody/replay.hpp"
#include "cody/rng.hpp"

using cody::Observation;
using cody::ReplayBuffer;
using cody::Rng;
using cody::Transition;

namespace {

Transition make_transition(int tag, int c = 3, int h = 4, int w = 4) {
  Transition t;
  t.state.resize(c, h, w);
  t.next_state.resize(c, h, w);
  for (auto& p : t.state.pixels) p = static_cast<std::uint8_t>(tag);
  for (auto& p : t.next_state.pixels) p = static_cast<std::uint8_t>(tag + 1);
  t.action = {0.01 * tag, -0.2};
  t.reward = tag;
  t.done = false;
  return t;
}

}  // namespace

TEST_CASE("push grows size up to capacity") {
  ReplayBuffer buf(3);
  buf.push(make_transition(1));
  REQUIRE(buf.size() == 1);
  buf.push(make_transition(2));
  buf.push(make_transition(3));
  REQUIRE(buf.size() == 3);
}

TEST_CASE("FIFO overwrite: oldest entry replaced beyond capacity") {
  ReplayBuffer buf(3);
  for (int i = 1; i <= 4; ++i) buf.push(make_transition(i));
  REQUIRE(buf.size() == 3);
  REQUIRE_FALSE(buf.contains(make_transition(1)));
  for (int i = 2; i <= 4; ++i) REQUIRE(buf.contains(make_transition(i)));
}

TEST_CASE("stored set equals the last capacity items for any longer sequence") {
  ReplayBuffer buf(5);
  const int total = 17;
  for (int i = 0; i < total; ++i) buf.push(make_transition(i));
  for (int i = 0; i < total - 5; ++i) REQUIRE_FALSE(buf.contains(make_transition(i)));
  for (int i = total - 5; i < total; ++i) REQUIRE(buf.contains(make_transition(i)));
}

TEST_CASE("default capacity comes from config") {
  cody::TrainConfig cfg;
  ReplayBuffer buf(cfg.replay_capacity);
  REQUIRE(buf.capacity() == 100000);
}

TEST_CASE("shape mismatch is rejected") {
  ReplayBuffer buf(4);
  buf.push(make_transition(1));
  REQUIRE_THROWS_AS(buf.push(make_transition(2, 3, 5, 5)), cody::ShapeError);

  Transition bad = make_transition(3);
  bad.next_state.resize(3, 5, 5);
  REQUIRE_THROWS_AS(buf.push(bad), cody::ShapeError);
}

TEST_CASE("action components are clamped to [-1,1] on push") {
  ReplayBuffer buf(2);
  Transition t = make_transition(1);
  t.action = {3.0, -7.0};
  buf.push(t);
  REQUIRE(buf.entry(0).action[0] == 1.0);
  REQUIRE(buf.entry(0).action[1] == -1.0);
}

TEST_CASE("singleton sample returns the stored entry bit-identically") {
  ReplayBuffer buf(4);
  Transition t = make_transition(7);
  t.reward = 0.123456789;
  buf.push(t);
  Rng rng(1);
  const auto batch = buf.sample(1, rng);
  REQUIRE(batch.states.row(0) == t.state);
  REQUIRE(batch.next_states.row(0) == t.next_state);
  REQUIRE(batch.actions[0] == t.action);
  REQUIRE(batch.rewards[0] == t.reward);
  REQUIRE(batch.dones[0] == t.done);
}

TEST_CASE("sampling is deterministic for a fixed rng seed") {
  ReplayBuffer buf(2000);
  for (int i = 0; i < 1000; ++i) buf.push(make_transition(i % 250));
  Rng r1(99), r2(99);
  const auto i1 = buf.sample_indices(256, r1);
  const auto i2 = buf.sample_indices(256, r2);
  REQUIRE(i1 == i2);
}

TEST_CASE("cold buffer gives an explicit not-warm error") {
  ReplayBuffer buf(10);
  buf.push(make_transition(1));
  Rng rng(0);
  REQUIRE_THROWS_WITH(buf.sample(2, rng), Catch::Matchers::ContainsSubstring("not warm"));
}

TEST_CASE("sampling is uniform over contents (5-sigma per entry)") {
  ReplayBuffer buf(10);
  for (int i = 0; i < 10; ++i) buf.push(make_transition(i));
  Rng rng(12345);
  const int draws = 100000;
  std::vector<int> counts(10, 0);
  for (int chunk = 0; chunk < draws / 10; ++chunk) {
    const auto idx = buf.sample_indices(10, rng);
    for (long i : idx) counts[static_cast<std::size_t>(i)]++;
  }
  const double expect = draws / 10.0;
  const double sigma = std::sqrt(draws * 0.1 * 0.9);
  for (int c : counts) REQUIRE(std::abs(c - expect) < 5.0 * sigma);
}

TEST_CASE("buffer serialization round-trips") {
  ReplayBuffer buf(6);
  for (int i = 0; i < 9; ++i) buf.push(make_transition(i));
  std::stringstream ss;
  buf.save(ss);
  ReplayBuffer loaded = ReplayBuffer::load(ss);
  REQUIRE(loaded.size() == buf.size());
  REQUIRE(loaded.capacity() == buf.capacity());
  for (long i = 0; i < buf.size(); ++i) {
    REQUIRE(loaded.entry(i).state == buf.entry(i).state);
    REQUIRE(loaded.entry(i).action == buf.entry(i).action);
    REQUIRE(loaded.entry(i).reward == buf.entry(i).reward);
  }
  // Overwrite position preserved: the next pushes land in the same slots.
  buf.push(make_transition(77));
  loaded.push(make_transition(77));
  Rng r1(5), r2(5);
  const auto a = buf.sample_indices(6, r1);
  const auto b = loaded.sample_indices(6, r2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE(buf.entry(a[i]).reward == loaded.entry(b[i]).reward);
  }
}
