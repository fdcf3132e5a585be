#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <queue>

#include "cody/envs.hpp"
#include "cody/rng.hpp"

using cody::EnvOptions;
using cody::Frame;
using cody::Observation;
using cody::PointMassEnv;
using cody::Rng;
using cody::make_env;

namespace {

bool nonzero_px(const Frame& f, int y, int x) {
  return f.at(0, y, x) || f.at(1, y, x) || f.at(2, y, x);
}

int connected_components(const Frame& f) {
  std::vector<char> seen(static_cast<std::size_t>(f.height) * f.width, 0);
  auto idx = [&](int y, int x) { return static_cast<std::size_t>(y) * f.width + x; };
  int comps = 0;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      if (!nonzero_px(f, y, x) || seen[idx(y, x)]) continue;
      ++comps;
      std::queue<std::pair<int, int>> q;
      q.push({y, x});
      seen[idx(y, x)] = 1;
      while (!q.empty()) {
        auto [cy, cx] = q.front();
        q.pop();
        const int dy[4] = {1, -1, 0, 0}, dx[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int ny = cy + dy[k], nx = cx + dx[k];
          if (ny < 0 || nx < 0 || ny >= f.height || nx >= f.width) continue;
          if (!nonzero_px(f, ny, nx) || seen[idx(ny, nx)]) continue;
          seen[idx(ny, nx)] = 1;
          q.push({ny, nx});
        }
      }
    }
  return comps;
}

double centroid_x(const Frame& f) {
  double sx = 0, mass = 0;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      const double v = f.at(0, y, x) + f.at(1, y, x) + f.at(2, y, x);
      sx += v * x;
      mass += v;
    }
  REQUIRE(mass > 0);
  return sx / mass;
}

EnvOptions small_opts(int action_repeat = 4) {
  EnvOptions o;
  o.image_size = 84;
  o.frame_stack = 3;
  o.action_repeat = action_repeat;
  return o;
}

}  // namespace

TEST_CASE("reset is deterministic given the rng seed") {
  auto e1 = make_env("point_mass", small_opts());
  auto e2 = make_env("point_mass", small_opts());
  Rng r1(7), r2(7);
  REQUIRE(e1->reset(r1) == e2->reset(r2));
  REQUIRE(e1->internal_state() == e2->internal_state());
}

TEST_CASE("observation shape is (3k, 84, 84) under defaults") {
  auto env = make_env("point_mass", small_opts());
  Rng rng(1);
  const Observation obs = env->reset(rng);
  REQUIRE(obs.channels == 9);
  REQUIRE(obs.height == 84);
  REQUIRE(obs.width == 84);
}

TEST_CASE("reset fills the stack by repeating the first frame") {
  auto env = make_env("pendulum", small_opts());
  Rng rng(3);
  const Observation obs = env->reset(rng);
  const Frame f = env->render();
  for (int k = 0; k < 3; ++k)
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < obs.height; ++y)
        for (int x = 0; x < obs.width; ++x)
          REQUIRE(obs.at(3 * k + c, y, x) == f.at(c, y, x));
}

TEST_CASE("pendulum reset renders exactly one blob") {
  auto env = make_env("pendulum", small_opts());
  Rng rng(11);
  env->reset(rng);
  REQUIRE(connected_components(env->render()) == 1);
}

TEST_CASE("zero action at zero velocity is a fixed point of the point mass") {
  auto env = make_env("point_mass_goal_a", small_opts());
  Rng rng(5);
  env->reset(rng);
  const auto st = env->internal_state();
  auto r1 = env->step({0.0, 0.0});
  auto r2 = env->step({0.0, 0.0});
  const auto st2 = env->internal_state();
  REQUIRE(st[0] == st2[0]);
  REQUIRE(st[1] == st2[1]);
  REQUIRE(r1.reward == r2.reward);
}

TEST_CASE("one agent step advances the underlying clock action_repeat times") {
  // The double integrator accumulates exactly n underlying velocity updates.
  auto env = make_env("point_mass_goal_a", small_opts(4));
  Rng rng(2);
  env->reset(rng);
  env->set_internal_state({0, 0, 0, 0, -0.5, -0.5});
  env->step({0.5, 0.0});
  const auto st = env->internal_state();
  REQUIRE(st[2] == Catch::Approx(4 * PointMassEnv::kDt * PointMassEnv::kAccelScale * 0.5)
                       .margin(1e-12));
}

TEST_CASE("constant-action velocity matches the analytic linear system to 1e-10") {
  auto env = make_env("point_mass_goal_a", small_opts(1));
  Rng rng(2);
  env->reset(rng);
  env->set_internal_state({0, 0, 0, 0, -0.5, -0.5});
  const double ax = 0.3, ay = -0.2;
  const int n = 7;
  for (int i = 0; i < n; ++i) env->step({ax, ay});
  const auto st = env->internal_state();
  REQUIRE(std::abs(st[2] - n * PointMassEnv::kDt * PointMassEnv::kAccelScale * ax) < 1e-10);
  REQUIRE(std::abs(st[3] - n * PointMassEnv::kDt * PointMassEnv::kAccelScale * ay) < 1e-10);
  // Position under symplectic Euler: p_n = dt^2 * a * sum_{i=1..n} i.
  const double psum = PointMassEnv::kDt * PointMassEnv::kDt * (n * (n + 1) / 2.0);
  REQUIRE(std::abs(st[0] - psum * ax) < 1e-10);
  REQUIRE(std::abs(st[1] - psum * ay) < 1e-10);
}

TEST_CASE("render is a pure function of the internal state") {
  auto env = make_env("point_mass", small_opts());
  Rng rng(9);
  env->reset(rng);
  const Frame f1 = env->render();
  const Frame f2 = env->render();
  REQUIRE(f1 == f2);
}

TEST_CASE("translating the mass moves the blob centroid right monotonically") {
  auto env = make_env("point_mass_goal_a", small_opts());
  Rng rng(4);
  env->reset(rng);
  double prev = -1e9;
  for (double px = -0.9; px <= 0.9; px += 0.15) {
    env->set_internal_state({px, 0.0, 0, 0, -0.5, -0.5});
    const double cx = centroid_x(env->render());
    REQUIRE(std::isfinite(cx));
    REQUIRE(cx > prev);
    prev = cx;
  }
}

TEST_CASE("centroid stays finite at the clamped arena corners") {
  auto env = make_env("point_mass_goal_a", small_opts());
  Rng rng(4);
  env->reset(rng);
  for (double corner : {-1.0, 1.0}) {
    env->set_internal_state({corner, corner, 0, 0, -0.5, -0.5});
    REQUIRE(std::isfinite(centroid_x(env->render())));
  }
}

TEST_CASE("frame-stack contract: observation equals the k most recent frames, newest last") {
  auto env = make_env("point_mass_goal_a", small_opts());
  Rng rng(8);
  env->reset(rng);
  std::vector<Frame> frames;
  Observation obs;
  for (int i = 0; i < 5; ++i) {
    auto sr = env->step({0.4, 0.1});
    frames.push_back(env->render());
    obs = sr.obs;
  }
  const std::size_t fsz = frames[0].pixels.size();
  for (int k = 0; k < 3; ++k) {
    const Frame& expect = frames[frames.size() - 3 + static_cast<std::size_t>(k)];
    for (std::size_t i = 0; i < fsz; ++i)
      REQUIRE(obs.pixels[static_cast<std::size_t>(k) * fsz + i] == expect.pixels[i]);
  }
}

TEST_CASE("Markov property: next state depends only on (state, action)") {
  auto e1 = make_env("pendulum", small_opts());
  auto e2 = make_env("pendulum", small_opts());
  Rng r1(1), r2(2);
  e1->reset(r1);
  e2->reset(r2);
  // Different histories.
  for (int i = 0; i < 10; ++i) e1->step({0.5});
  for (int i = 0; i < 3; ++i) e2->step({-1.0});
  const std::vector<double> state = {0.3, std::sqrt(1 - 0.09), 1.7};
  e1->set_internal_state(state);
  e2->set_internal_state(state);
  e1->step({0.25});
  e2->step({0.25});
  REQUIRE(e1->internal_state() == e2->internal_state());
}

TEST_CASE("per-step reward bounded by action_repeat times the instant max") {
  auto env = make_env("point_mass", small_opts(8));
  Rng rng(17);
  env->reset(rng);
  for (int i = 0; i < 50; ++i) {
    auto sr = env->step({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    REQUIRE(sr.reward >= 0.0);
    REQUIRE(sr.reward <= 8.0);
    if (sr.done) break;
  }
}

TEST_CASE("episode ends only at episode_length and is a truncation") {
  auto opts = small_opts(4);
  auto env = make_env("point_mass", opts);
  REQUIRE(env->spec().episode_length == 250);
  Rng rng(6);
  env->reset(rng);
  for (int i = 1; i <= 250; ++i) {
    auto sr = env->step({0.1, 0.1});
    REQUIRE(sr.done == (i == 250));
    REQUIRE_FALSE(sr.terminal);
  }
}

TEST_CASE("NaN action is rejected") {
  auto env = make_env("point_mass", small_opts());
  Rng rng(1);
  env->reset(rng);
  REQUIRE_THROWS_AS(env->step({std::nan(""), 0.0}), std::invalid_argument);
}

TEST_CASE("unknown env name is a config error") {
  REQUIRE_THROWS_AS(make_env("walker_walk", small_opts()), cody::ConfigError);
}

TEST_CASE("env state serialization round-trips mid-episode") {
  auto env = make_env("pendulum", small_opts());
  Rng rng(13);
  env->reset(rng);
  for (int i = 0; i < 7; ++i) env->step({0.3});
  std::stringstream ss;
  env->save_state(ss);
  auto env2 = make_env("pendulum", small_opts());
  Rng rng2(99);
  env2->reset(rng2);
  env2->load_state(ss);
  REQUIRE(env->internal_state() == env2->internal_state());
  auto a = env->step({0.1});
  auto b = env2->step({0.1});
  REQUIRE(a.obs == b.obs);
  REQUIRE(a.reward == b.reward);
}
