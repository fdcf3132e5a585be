#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <vector>

#include "cody/common.hpp"
#include "cody/rng.hpp"

namespace cody {

/// Stacked-frame pixel observation, uint8, shape (3*k, h, w), values 0..255.
struct Observation {
  int channels = 0, height = 0, width = 0;
  std::vector<std::uint8_t> pixels;  // channel-major: ((c*h)+y)*w+x

  void resize(int c, int h, int w) {
    channels = c;
    height = h;
    width = w;
    pixels.assign(static_cast<std::size_t>(c) * h * w, 0);
  }
  std::uint8_t& at(int c, int y, int x) {
    return pixels[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  std::uint8_t at(int c, int y, int x) const {
    return pixels[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  bool same_shape(const Observation& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
  bool operator==(const Observation& o) const {
    return same_shape(o) && pixels == o.pixels;
  }
};

/// A single RGB frame is an Observation with channels == 3.
using Frame = Observation;

/// Batch of uint8 observations with identical shape, stacked on a leading axis.
struct ObsBatch {
  int n = 0, channels = 0, height = 0, width = 0;
  std::vector<std::uint8_t> pixels;

  void resize(int n_, int c, int h, int w) {
    n = n_;
    channels = c;
    height = h;
    width = w;
    pixels.assign(static_cast<std::size_t>(n) * c * h * w, 0);
  }
  std::size_t row_size() const { return static_cast<std::size_t>(channels) * height * width; }
  std::uint8_t& at(int ni, int c, int y, int x) {
    return pixels[((static_cast<std::size_t>(ni) * channels + c) * height + y) * width + x];
  }
  std::uint8_t at(int ni, int c, int y, int x) const {
    return pixels[((static_cast<std::size_t>(ni) * channels + c) * height + y) * width + x];
  }
  void set_row(int ni, const Observation& obs) {
    std::memcpy(pixels.data() + static_cast<std::size_t>(ni) * row_size(), obs.pixels.data(),
                row_size());
  }
  Observation row(int ni) const {
    Observation o;
    o.resize(channels, height, width);
    std::memcpy(o.pixels.data(), pixels.data() + static_cast<std::size_t>(ni) * row_size(),
                row_size());
    return o;
  }
};

/// One environment interaction record.
struct Transition {
  Observation state;
  std::vector<double> action;  // components clamped to [-1, 1]
  double reward = 0.0;
  Observation next_state;
  bool done = false;  // true MDP termination (time-limit truncations carry false)

  void clamp_action() {
    for (double& a : action) a = std::min(1.0, std::max(-1.0, a));
  }
};

/// Uint8 minibatch drawn from the buffer, tensors stacked along the batch axis.
struct TransitionBatch {
  ObsBatch states;
  ObsBatch next_states;
  std::vector<std::vector<double>> actions;
  std::vector<double> rewards;
  std::vector<bool> dones;
};

/// Bounded FIFO store of Transitions with uniform random minibatch sampling
/// (with replacement). Single-writer, single-reader.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(long capacity) : capacity_(capacity) {
    check(capacity >= 1, "ReplayBuffer: capacity must be positive");
    storage_.reserve(static_cast<std::size_t>(std::min<long>(capacity, 1 << 20)));
  }

  long capacity() const { return capacity_; }
  long size() const { return static_cast<long>(storage_.size()); }

  void push(Transition t) {
    t.clamp_action();
    if (!storage_.empty()) {
      check_shape(t.state.same_shape(storage_.front().state),
                  "ReplayBuffer: observation shape mismatch");
    }
    check_shape(t.state.same_shape(t.next_state),
                "ReplayBuffer: state/next_state shape mismatch");
    if (size() < capacity_) {
      storage_.push_back(std::move(t));
    } else {
      storage_[next_] = std::move(t);
    }
    next_ = (next_ + 1) % capacity_;
  }

  const Transition& entry(long i) const { return storage_[static_cast<std::size_t>(i)]; }

  bool contains(const Transition& t) const {
    for (const auto& s : storage_)
      if (s.state == t.state && s.action == t.action && s.reward == t.reward &&
          s.next_state == t.next_state && s.done == t.done)
        return true;
    return false;
  }

  std::vector<long> sample_indices(int batch, Rng& rng) const {
    if (size() < batch)
      throw std::runtime_error("ReplayBuffer: buffer not warm (size " + std::to_string(size()) +
                               " < batch " + std::to_string(batch) + ")");
    std::vector<long> idx(batch);
    for (int i = 0; i < batch; ++i) idx[i] = rng.uniform_int(0, static_cast<int>(size()) - 1);
    return idx;
  }

  TransitionBatch sample(int batch, Rng& rng) const {
    return gather(sample_indices(batch, rng));
  }

  TransitionBatch gather(const std::vector<long>& idx) const {
    TransitionBatch b;
    check(!idx.empty(), "ReplayBuffer: empty batch");
    const Observation& ref = storage_[static_cast<std::size_t>(idx[0])].state;
    b.states.resize(static_cast<int>(idx.size()), ref.channels, ref.height, ref.width);
    b.next_states.resize(static_cast<int>(idx.size()), ref.channels, ref.height, ref.width);
    b.actions.resize(idx.size());
    b.rewards.resize(idx.size());
    b.dones.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const Transition& t = storage_[static_cast<std::size_t>(idx[i])];
      b.states.set_row(static_cast<int>(i), t.state);
      b.next_states.set_row(static_cast<int>(i), t.next_state);
      b.actions[i] = t.action;
      b.rewards[i] = t.reward;
      b.dones[i] = t.done;
    }
    return b;
  }

  void save(std::ostream& os) const {
    auto w64 = [&](std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    w64(static_cast<std::uint64_t>(capacity_));
    w64(static_cast<std::uint64_t>(storage_.size()));
    w64(static_cast<std::uint64_t>(next_));
    if (storage_.empty()) return;
    const Observation& ref = storage_.front().state;
    w64(static_cast<std::uint64_t>(ref.channels));
    w64(static_cast<std::uint64_t>(ref.height));
    w64(static_cast<std::uint64_t>(ref.width));
    w64(static_cast<std::uint64_t>(storage_.front().action.size()));
    for (const auto& t : storage_) {
      os.write(reinterpret_cast<const char*>(t.state.pixels.data()),
               static_cast<std::streamsize>(t.state.pixels.size()));
      os.write(reinterpret_cast<const char*>(t.next_state.pixels.data()),
               static_cast<std::streamsize>(t.next_state.pixels.size()));
      os.write(reinterpret_cast<const char*>(t.action.data()),
               static_cast<std::streamsize>(t.action.size() * sizeof(double)));
      os.write(reinterpret_cast<const char*>(&t.reward), sizeof(double));
      const std::uint8_t d = t.done ? 1 : 0;
      os.write(reinterpret_cast<const char*>(&d), 1);
    }
  }

  static ReplayBuffer load(std::istream& is) {
    auto r64 = [&] {
      std::uint64_t v = 0;
      is.read(reinterpret_cast<char*>(&v), 8);
      return v;
    };
    const long capacity = static_cast<long>(r64());
    ReplayBuffer buf(capacity);
    const std::uint64_t count = r64();
    buf.next_ = static_cast<long>(r64());
    if (count == 0) return buf;
    const int c = static_cast<int>(r64());
    const int h = static_cast<int>(r64());
    const int w = static_cast<int>(r64());
    const std::uint64_t adim = r64();
    buf.storage_.resize(count);
    for (auto& t : buf.storage_) {
      t.state.resize(c, h, w);
      t.next_state.resize(c, h, w);
      t.action.resize(adim);
      is.read(reinterpret_cast<char*>(t.state.pixels.data()),
              static_cast<std::streamsize>(t.state.pixels.size()));
      is.read(reinterpret_cast<char*>(t.next_state.pixels.data()),
              static_cast<std::streamsize>(t.next_state.pixels.size()));
      is.read(reinterpret_cast<char*>(t.action.data()),
              static_cast<std::streamsize>(adim * sizeof(double)));
      is.read(reinterpret_cast<char*>(&t.reward), sizeof(double));
      std::uint8_t d = 0;
      is.read(reinterpret_cast<char*>(&d), 1);
      t.done = d != 0;
    }
    check(is.good(), "ReplayBuffer: truncated stream");
    return buf;
  }

 private:
  long capacity_;
  long next_ = 0;
  std::vector<Transition> storage_;
};

}  // namespace cody
