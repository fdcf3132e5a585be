#pragma once

#include <cmath>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "cody/common.hpp"
#include "cody/replay.hpp"
#include "cody/rng.hpp"

namespace cody {

struct EnvSpec {
  std::string name;
  int action_dim = 0;
  int episode_length = 0;  // agent steps, after action repeat
  int action_repeat = 1;
  double reward_min = 0.0;  // per agent step
  double reward_max = 1.0;
};

struct EnvOptions {
  int image_size = 84;
  int frame_stack = 3;
  int action_repeat = 4;
  int underlying_budget = 1000;  // underlying steps per episode (DMC convention)
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;      // episode over (time limit counts)
  bool terminal = false;  // true MDP termination; our tasks never terminate early
};

/// Markovian pixel control environment. reset/step/render is the adapter
/// seam for plugging in external simulators later.
class PixelEnv {
 public:
  virtual ~PixelEnv() = default;
  virtual const EnvSpec& spec() const = 0;
  virtual Observation reset(Rng& rng) = 0;
  virtual StepResult step(const std::vector<double>& action) = 0;
  virtual Frame render() const = 0;
  virtual std::vector<double> internal_state() const = 0;
  virtual void set_internal_state(const std::vector<double>& s) = 0;
  virtual void save_state(std::ostream& os) const = 0;
  virtual void load_state(std::istream& is) = 0;
};

namespace draw {

inline void blend_max(Frame& f, int y, int x, double cov, int r, int g, int b) {
  auto mix = [&](int c, int v) {
    const int cur = f.at(c, y, x);
    const int val = static_cast<int>(std::lround(v * cov));
    if (val > cur) f.at(c, y, x) = static_cast<std::uint8_t>(val);
  };
  mix(0, r);
  mix(1, g);
  mix(2, b);
}

/// Anti-aliased filled disc; coordinates and radius in pixels.
inline void disc(Frame& f, double cx, double cy, double radius, int r, int g, int b) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius - 1)));
  const int x1 = std::min(f.width - 1, static_cast<int>(std::ceil(cx + radius + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius - 1)));
  const int y1 = std::min(f.height - 1, static_cast<int>(std::ceil(cy + radius + 1)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      const double cov = std::min(1.0, std::max(0.0, radius - d + 0.5));
      if (cov > 0) blend_max(f, y, x, cov, r, g, b);
    }
}

/// Anti-aliased capsule (rod) between two pixel-space endpoints.
inline void rod(Frame& f, double x0p, double y0p, double x1p, double y1p, double halfw, int r,
                int g, int b) {
  const double lx = x1p - x0p, ly = y1p - y0p;
  const double len2 = lx * lx + ly * ly;
  const int x0 = std::max(0, static_cast<int>(std::floor(std::min(x0p, x1p) - halfw - 1)));
  const int x1 = std::min(f.width - 1, static_cast<int>(std::ceil(std::max(x0p, x1p) + halfw + 1)));
  const int y0 = std::max(0, static_cast<int>(std::floor(std::min(y0p, y1p) - halfw - 1)));
  const int y1 =
      std::min(f.height - 1, static_cast<int>(std::ceil(std::max(y0p, y1p) + halfw + 1)));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double px = x + 0.5 - x0p, py = y + 0.5 - y0p;
      double t = len2 > 0 ? (px * lx + py * ly) / len2 : 0.0;
      t = std::min(1.0, std::max(0.0, t));
      const double d = std::hypot(px - t * lx, py - t * ly);
      const double cov = std::min(1.0, std::max(0.0, halfw - d + 0.5));
      if (cov > 0) blend_max(f, y, x, cov, r, g, b);
    }
}

}  // namespace draw

/// Shared frame-stack / action-repeat machinery. Subclasses provide the
/// underlying dynamics and a renderer that is a pure function of the state.
class PixelEnvBase : public PixelEnv {
 public:
  PixelEnvBase(std::string name, int action_dim, EnvOptions opts)
      : opts_(opts) {
    check(opts.underlying_budget % opts.action_repeat == 0,
          "EnvOptions: action_repeat must divide the underlying step budget");
    spec_.name = std::move(name);
    spec_.action_dim = action_dim;
    spec_.action_repeat = opts.action_repeat;
    spec_.episode_length = opts.underlying_budget / opts.action_repeat;
    spec_.reward_min = 0.0;
    spec_.reward_max = static_cast<double>(opts.action_repeat);
  }

  const EnvSpec& spec() const override { return spec_; }
  const EnvOptions& options() const { return opts_; }

  Observation reset(Rng& rng) override {
    reset_state(rng);
    agent_step_ = 0;
    // The paper-side convention leaves the initial stack unspecified; we
    // repeat the first rendered frame k times.
    const Frame f = render();
    stack_.assign(static_cast<std::size_t>(opts_.frame_stack), f);
    return stacked();
  }

  StepResult step(const std::vector<double>& action) override {
    check_shape(static_cast<int>(action.size()) == spec_.action_dim,
                "env step: wrong action dimension");
    std::vector<double> a = action;
    for (double& v : a) {
      if (std::isnan(v)) throw std::invalid_argument("env step: NaN in action");
      v = std::min(1.0, std::max(-1.0, v));
    }
    double reward = 0.0;
    for (int i = 0; i < spec_.action_repeat; ++i) reward += step_once(a);
    stack_.pop_front();
    stack_.push_back(render());
    ++agent_step_;
    StepResult out;
    out.obs = stacked();
    out.reward = reward;
    out.done = agent_step_ >= spec_.episode_length;
    out.terminal = false;
    return out;
  }

  void save_state(std::ostream& os) const override {
    const auto st = internal_state();
    std::uint64_t n = st.size();
    os.write(reinterpret_cast<const char*>(&n), 8);
    os.write(reinterpret_cast<const char*>(st.data()), static_cast<std::streamsize>(n * 8));
    std::uint64_t steps = static_cast<std::uint64_t>(agent_step_);
    os.write(reinterpret_cast<const char*>(&steps), 8);
    std::uint64_t frames = stack_.size();
    os.write(reinterpret_cast<const char*>(&frames), 8);
    for (const Frame& f : stack_)
      os.write(reinterpret_cast<const char*>(f.pixels.data()),
               static_cast<std::streamsize>(f.pixels.size()));
  }

  void load_state(std::istream& is) override {
    std::uint64_t n = 0;
    is.read(reinterpret_cast<char*>(&n), 8);
    std::vector<double> st(n);
    is.read(reinterpret_cast<char*>(st.data()), static_cast<std::streamsize>(n * 8));
    set_internal_state(st);
    std::uint64_t steps = 0;
    is.read(reinterpret_cast<char*>(&steps), 8);
    agent_step_ = static_cast<int>(steps);
    std::uint64_t frames = 0;
    is.read(reinterpret_cast<char*>(&frames), 8);
    stack_.clear();
    for (std::uint64_t i = 0; i < frames; ++i) {
      Frame f;
      f.resize(3, opts_.image_size, opts_.image_size);
      is.read(reinterpret_cast<char*>(f.pixels.data()),
              static_cast<std::streamsize>(f.pixels.size()));
      stack_.push_back(std::move(f));
    }
    check(is.good(), "env load_state: truncated stream");
  }

  Observation current_observation() const { return stacked(); }

 protected:
  virtual void reset_state(Rng& rng) = 0;
  virtual double step_once(const std::vector<double>& action) = 0;

  Frame blank_frame() const {
    Frame f;
    f.resize(3, opts_.image_size, opts_.image_size);
    return f;
  }

  /// World box [-1.2, 1.2] maps onto the square image.
  double to_px(double world) const { return (world + 1.2) / 2.4 * opts_.image_size; }
  double px_len(double world_len) const { return world_len / 2.4 * opts_.image_size; }

  Observation stacked() const {
    Observation o;
    o.resize(3 * opts_.frame_stack, opts_.image_size, opts_.image_size);
    // Frames ordered oldest..newest, newest-last.
    std::size_t off = 0;
    for (const Frame& f : stack_) {
      std::copy(f.pixels.begin(), f.pixels.end(), o.pixels.begin() + static_cast<std::ptrdiff_t>(off));
      off += f.pixels.size();
    }
    return o;
  }

  EnvOptions opts_;
  EnvSpec spec_;
  std::deque<Frame> stack_;
  int agent_step_ = 0;
};

/// 2D double integrator on the [-1,1]^2 arena. Actions are accelerations,
/// reward is 1 - tanh(3 * distance to goal) per underlying step. The default
/// task randomizes the goal each episode and renders it as a second disc;
/// the goal_a / goal_b variants fix the goal and do not render it, so they
/// share dynamics and observations and differ only in reward.
class PointMassEnv : public PixelEnvBase {
 public:
  static constexpr double kDt = 0.05;
  static constexpr double kAccelScale = 1.0;
  static constexpr double kVMax = 1.0;
  static constexpr double kRewardSharpness = 3.0;

  enum class GoalMode { randomized, fixed_a, fixed_b };

  PointMassEnv(EnvOptions opts, GoalMode mode)
      : PixelEnvBase(mode == GoalMode::randomized ? "point_mass"
                     : mode == GoalMode::fixed_a  ? "point_mass_goal_a"
                                                  : "point_mass_goal_b",
                     2, opts),
        mode_(mode) {
    if (mode_ == GoalMode::fixed_a) goal_ = {-0.5, -0.5};
    if (mode_ == GoalMode::fixed_b) goal_ = {0.5, 0.5};
    pos_ = {0.0, 0.0};
    vel_ = {0.0, 0.0};
  }

  Frame render() const override {
    Frame f = blank_frame();
    if (mode_ == GoalMode::randomized)
      draw::disc(f, to_px(goal_[0]), to_px(goal_[1]), px_len(0.12), 60, 255, 60);
    draw::disc(f, to_px(pos_[0]), to_px(pos_[1]), px_len(0.10), 255, 60, 60);
    return f;
  }

  std::vector<double> internal_state() const override {
    return {pos_[0], pos_[1], vel_[0], vel_[1], goal_[0], goal_[1]};
  }
  void set_internal_state(const std::vector<double>& s) override {
    check_shape(s.size() == 6, "point_mass: internal state is 6-dim");
    pos_ = {s[0], s[1]};
    vel_ = {s[2], s[3]};
    goal_ = {s[4], s[5]};
  }
  std::array<double, 2> goal() const { return goal_; }

 protected:
  void reset_state(Rng& rng) override {
    pos_ = {rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)};
    vel_ = {0.0, 0.0};
    if (mode_ == GoalMode::randomized) goal_ = {rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6)};
  }

  double step_once(const std::vector<double>& a) override {
    for (int i = 0; i < 2; ++i) {
      vel_[i] += kDt * kAccelScale * a[i];
      vel_[i] = std::min(kVMax, std::max(-kVMax, vel_[i]));
    }
    for (int i = 0; i < 2; ++i) {
      pos_[i] += kDt * vel_[i];
      if (pos_[i] > 1.0) {
        pos_[i] = 1.0;
        vel_[i] = 0.0;
      } else if (pos_[i] < -1.0) {
        pos_[i] = -1.0;
        vel_[i] = 0.0;
      }
    }
    const double dist = std::hypot(pos_[0] - goal_[0], pos_[1] - goal_[1]);
    return 1.0 - std::tanh(kRewardSharpness * dist);
  }

 private:
  GoalMode mode_;
  std::array<double, 2> pos_{}, vel_{}, goal_{};
};

/// Torque-limited pendulum swingup. The state is (cos t, sin t, tdot) with
/// the angle measured from upright; reward is (1 + cos t) / 2 per underlying
/// step. Max torque is half the gravity torque, so the pendulum must pump.
class PendulumEnv : public PixelEnvBase {
 public:
  static constexpr double kDt = 0.02;
  static constexpr double kGravity = 10.0;
  static constexpr double kLength = 1.0;
  static constexpr double kMass = 1.0;
  static constexpr double kMaxTorque = 5.0;
  static constexpr double kMaxSpeed = 8.0;

  explicit PendulumEnv(EnvOptions opts) : PixelEnvBase("pendulum", 1, opts) {}

  Frame render() const override {
    Frame f = blank_frame();
    const double tipx = 0.8 * std::sin(theta_);
    const double tipy = 0.8 * std::cos(theta_);  // +y is up in world coords
    // Screen y grows downward.
    const double cx = to_px(0.0), cy = to_px(0.0);
    const double tx = to_px(tipx);
    const double ty = static_cast<double>(opts_.image_size) - to_px(tipy);
    draw::rod(f, cx, cy, tx, ty, px_len(0.06), 230, 230, 80);
    draw::disc(f, tx, ty, px_len(0.12), 230, 120, 40);
    return f;
  }

  std::vector<double> internal_state() const override {
    return {std::cos(theta_), std::sin(theta_), thetadot_};
  }
  void set_internal_state(const std::vector<double>& s) override {
    check_shape(s.size() == 3, "pendulum: internal state is 3-dim");
    theta_ = std::atan2(s[1], s[0]);
    thetadot_ = s[2];
  }

 protected:
  void reset_state(Rng& rng) override {
    theta_ = M_PI + rng.uniform(-0.1, 0.1);  // hanging down
    thetadot_ = rng.uniform(-0.05, 0.05);
  }

  double step_once(const std::vector<double>& a) override {
    const double torque = kMaxTorque * a[0];
    const double acc = (3.0 * kGravity / (2.0 * kLength)) * std::sin(theta_) +
                       3.0 / (kMass * kLength * kLength) * torque;
    thetadot_ += kDt * acc;
    thetadot_ = std::min(kMaxSpeed, std::max(-kMaxSpeed, thetadot_));
    theta_ += kDt * thetadot_;
    theta_ = std::remainder(theta_, 2.0 * M_PI);
    return (1.0 + std::cos(theta_)) / 2.0;
  }

 private:
  double theta_ = M_PI;
  double thetadot_ = 0.0;
};

inline std::vector<std::string> env_names() {
  return {"point_mass", "point_mass_goal_a", "point_mass_goal_b", "pendulum"};
}

inline std::unique_ptr<PixelEnv> make_env(const std::string& name, const EnvOptions& opts) {
  if (name == "point_mass")
    return std::make_unique<PointMassEnv>(opts, PointMassEnv::GoalMode::randomized);
  if (name == "point_mass_goal_a")
    return std::make_unique<PointMassEnv>(opts, PointMassEnv::GoalMode::fixed_a);
  if (name == "point_mass_goal_b")
    return std::make_unique<PointMassEnv>(opts, PointMassEnv::GoalMode::fixed_b);
  if (name == "pendulum") return std::make_unique<PendulumEnv>(opts);
  throw ConfigError("unknown env name: " + name);
}

}  // namespace cody
