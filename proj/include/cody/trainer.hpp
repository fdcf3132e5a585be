#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "cody/adam.hpp"
#include "cody/augment.hpp"
#include "cody/checkpoint.hpp"
#include "cody/codyloss.hpp"
#include "cody/config.hpp"
#include "cody/envs.hpp"
#include "cody/metrics.hpp"
#include "cody/nets.hpp"
#include "cody/param.hpp"
#include "cody/replay.hpp"
#include "cody/rng.hpp"
#include "cody/rollout.hpp"
#include "cody/sac.hpp"

namespace cody {

/// Joint training state: environment, replay buffer, all parameter trees,
/// one optimizer per group (critic+encoder, actor, auxiliary-task group,
/// temperature) and named rng substreams. Performs one gradient update per
/// environment step after warm-up.
///
/// Not movable: optimizers hold pointers into the network members.
template <typename S>
class TrainSession {
 public:
  explicit TrainSession(TrainConfig cfg, bool transfer_mode = false)
      : cfg_(std::move(cfg)), transfer_mode_(transfer_mode), buffer_(1) {
    cfg_.validate();
    EnvOptions eopts;
    eopts.image_size = cfg_.image_size;
    eopts.frame_stack = cfg_.frame_stack;
    eopts.action_repeat = cfg_.action_repeat;
    env_ = make_env(cfg_.env_name, eopts);
    eval_env_ = make_env(cfg_.env_name, eopts);
    buffer_ = ReplayBuffer(cfg_.replay_capacity);
    aug_.max_shift = cfg_.max_shift;

    rng_init_ = Rng::substream(cfg_.seed, "init");
    rng_env_ = Rng::substream(cfg_.seed, "env");
    rng_eval_ = Rng::substream(cfg_.seed, "eval");
    rng_aug_ = Rng::substream(cfg_.seed, "augment");
    rng_policy_ = Rng::substream(cfg_.seed, "policy");
    rng_actor_ = Rng::substream(cfg_.seed, "actor");
    rng_buffer_ = Rng::substream(cfg_.seed, "buffer");

    const int adim = env_->spec().action_dim;
    EncoderArch arch;
    arch.image_size = cfg_.image_size;
    arch.in_channels = 3 * cfg_.frame_stack;
    arch.conv_channels = cfg_.conv_channels;
    for (int i = 0; i < 4; ++i) arch.strides[static_cast<std::size_t>(i)] = cfg_.conv_strides[static_cast<std::size_t>(i)];
    arch.conv_pad = cfg_.conv_pad;
    arch.embed_dim = cfg_.embed_dim;
    arch.tanh_out = cfg_.encoder_tanh;

    enc_online_.init(arch, rng_init_);
    enc_target_.init(arch, rng_init_);
    act_enc_.init(adim, cfg_.action_hidden, cfg_.action_embed_dim, rng_init_);
    trans_online_.init(cfg_.embed_dim, cfg_.action_embed_dim, cfg_.transition_hidden, rng_init_);
    trans_target_.init(cfg_.embed_dim, cfg_.action_embed_dim, cfg_.transition_hidden, rng_init_);
    q1_.init(cfg_.embed_dim, adim, cfg_.critic_hidden, rng_init_);
    q2_.init(cfg_.embed_dim, adim, cfg_.critic_hidden, rng_init_);
    q1_target_.init(cfg_.embed_dim, adim, cfg_.critic_hidden, rng_init_);
    q2_target_.init(cfg_.embed_dim, adim, cfg_.critic_hidden, rng_init_);
    policy_.init(cfg_.embed_dim, adim, cfg_.critic_hidden, rng_init_);
    cls_.init(cfg_.embed_dim, cfg_.action_embed_dim, rng_init_);
    temp_.init(static_cast<S>(cfg_.init_temperature), adim, cfg_.learn_temperature);

    copy_params(encoder_target_params(), encoder_online_params());
    copy_params(transition_target_params(), transition_online_params());
    copy_params(collect_of(q1_target_, "q1_target"), collect_of(q1_, "q1"));
    copy_params(collect_of(q2_target_, "q2_target"), collect_of(q2_, "q2"));

    Params<S> critic_group;
    q1_.collect(critic_group, "q1");
    q2_.collect(critic_group, "q2");
    if (!transfer_mode_) enc_online_.collect(critic_group, "enc_online");
    opt_critic_ = Adam<S>(critic_group, cfg_.lr_critic);

    Params<S> actor_group;
    policy_.collect(actor_group, "policy");
    opt_actor_ = Adam<S>(actor_group, cfg_.lr_actor);

    Params<S> cody_group;
    enc_online_.collect(cody_group, "enc_online");
    trans_online_.collect(cody_group, "trans_online");
    act_enc_.collect(cody_group, "act_enc");
    cls_.collect(cody_group, "classifier");
    opt_cody_ = Adam<S>(cody_group, cfg_.lr_encoder);

    Params<S> temp_group;
    temp_.collect(temp_group, "temperature");
    opt_temp_ = Adam<S>(temp_group, cfg_.temperature_lr);
  }

  TrainSession(const TrainSession&) = delete;
  TrainSession& operator=(const TrainSession&) = delete;

  const TrainConfig& config() const { return cfg_; }
  ReplayBuffer& buffer() { return buffer_; }
  PixelEnv& env() { return *env_; }
  PixelEnv& eval_env() { return *eval_env_; }
  long env_steps() const { return env_step_; }
  long grad_steps() const { return grad_step_; }
  bool transfer_mode() const { return transfer_mode_; }

  StateEncoder<S>& encoder() { return enc_online_; }
  StateEncoder<S>& target_encoder() { return enc_target_; }
  ActionEncoder<S>& action_encoder() { return act_enc_; }
  TransitionModel<S>& transition() { return trans_online_; }
  TransitionModel<S>& target_transition() { return trans_target_; }
  GaussianPolicy<S>& policy() { return policy_; }
  QFunction<S>& q1() { return q1_; }
  QFunction<S>& q2() { return q2_; }
  ClassifierWeights<S>& classifier() { return cls_; }
  Temperature<S>& temperature() { return temp_; }
  Rng& eval_rng() { return rng_eval_; }

  void enable_phase_log() { phase_log_enabled_ = true; }
  const std::vector<std::string>& phase_log() const { return phase_log_; }

  Params<S> all_params() {
    Params<S> ps;
    enc_online_.collect(ps, "enc_online");
    enc_target_.collect(ps, "enc_target");
    act_enc_.collect(ps, "act_enc");
    trans_online_.collect(ps, "trans_online");
    trans_target_.collect(ps, "trans_target");
    q1_.collect(ps, "q1");
    q2_.collect(ps, "q2");
    q1_target_.collect(ps, "q1_target");
    q2_target_.collect(ps, "q2_target");
    policy_.collect(ps, "policy");
    cls_.collect(ps, "classifier");
    temp_.collect(ps, "temperature");
    return ps;
  }
  Params<S> encoder_online_params() { return collect_of(enc_online_, "enc_online"); }
  Params<S> encoder_target_params() { return collect_of(enc_target_, "enc_target"); }
  Params<S> transition_online_params() { return collect_of(trans_online_, "trans_online"); }
  Params<S> transition_target_params() { return collect_of(trans_target_, "trans_target"); }
  Params<S> target_params() {
    Params<S> ps;
    enc_target_.collect(ps, "enc_target");
    trans_target_.collect(ps, "trans_target");
    q1_target_.collect(ps, "q1_target");
    q2_target_.collect(ps, "q2_target");
    return ps;
  }

  /// One environment interaction: random policy during warm-up, the current
  /// stochastic policy afterwards. Pushes the transition into the buffer.
  void env_interact() {
    if (!have_obs_) {
      obs_ = env_->reset(rng_env_);
      have_obs_ = true;
    }
    const int adim = env_->spec().action_dim;
    std::vector<double> action(static_cast<std::size_t>(adim));
    if (env_step_ < cfg_.init_steps) {
      for (auto& a : action) a = rng_policy_.uniform(-1.0, 1.0);
    } else {
      const Matrix<S> z = encode_single(enc_online_, obs_);
      auto s = policy_.sample(z, rng_policy_);
      for (int k = 0; k < adim; ++k) action[static_cast<std::size_t>(k)] = s.action(0, k);
    }
    StepResult sr = env_->step(action);
    Transition t;
    t.state = obs_;
    t.action = action;
    t.reward = sr.reward;
    t.next_state = sr.obs;
    t.done = sr.terminal;  // time-limit truncation bootstraps (d = 0)
    buffer_.push(std::move(t));
    obs_ = sr.done ? env_->reset(rng_env_) : std::move(sr.obs);
    ++env_step_;
  }

  /// One gradient step in the Algorithm-1 phase order: critic, actor,
  /// temperature, auxiliary losses, target-critic EMA (every 2nd step),
  /// target encoder/transition EMA (every step).
  LossBundle<S> train_step() {
    if (buffer_.size() < cfg_.batch_size)
      throw std::runtime_error("train_step: buffer not warm (size " +
                               std::to_string(buffer_.size()) + " < batch " +
                               std::to_string(cfg_.batch_size) + ")");
    ++grad_step_;
    LossBundle<S> bundle;
    phase("sample");
    const auto idx = buffer_.sample_indices(cfg_.batch_size, rng_buffer_);
    const TransitionBatch batch = buffer_.gather(idx);
    const int B = cfg_.batch_size;
    const int adim = env_->spec().action_dim;

    const bool need_view2 = !transfer_mode_ && mvmi_active(cfg_.ablation);
    ObsBatch view1 = random_shift(batch.states, aug_, rng_aug_);
    ObsBatch view2;
    if (need_view2) view2 = random_shift(batch.states, aug_, rng_aug_);
    ObsBatch next_view = random_shift(batch.next_states, aug_, rng_aug_);

    const FeatureMap<S> x1 = to_feature_map<S>(view1);
    const FeatureMap<S> xn = to_feature_map<S>(next_view);

    Matrix<S> actions(B, adim);
    Vector<S> rewards(B), dones(B);
    for (int i = 0; i < B; ++i) {
      for (int k = 0; k < adim; ++k)
        actions(i, k) = static_cast<S>(batch.actions[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)]);
      rewards(i) = static_cast<S>(batch.rewards[static_cast<std::size_t>(i)]);
      dones(i) = batch.dones[static_cast<std::size_t>(i)] ? S(1) : S(0);
    }

    const S alpha = temp_.value();

    // --- Soft Q-function update (gradients reach the online encoder). ---
    phase("critic");
    opt_critic_.zero_grad();
    // Detached target: a' ~ pi(.|z') on the online embedding, Q targets on
    // the target-encoder embedding.
    const Matrix<S> zn_pi = enc_online_.forward(xn);
    auto next_sample = policy_.sample(zn_pi, rng_actor_);
    const Matrix<S> zn_target = enc_target_.forward(xn);
    const Vector<S> q1n = q1_target_.forward(zn_target, next_sample.action);
    const Vector<S> q2n = q2_target_.forward(zn_target, next_sample.action);
    const Vector<S> y = target_value(rewards, dones, Vector<S>(q1n.cwiseMin(q2n)),
                                     next_sample.log_prob, alpha, static_cast<S>(cfg_.discount));

    typename StateEncoder<S>::Cache enc_cache;
    const Matrix<S> z = enc_online_.forward(x1, &enc_cache);
    typename QFunction<S>::Cache q1_cache, q2_cache;
    const Vector<S> q1v = q1_.forward(z, actions, &q1_cache);
    const Vector<S> q2v = q2_.forward(z, actions, &q2_cache);
    auto closs = critic_loss(q1v, q2v, y);
    bundle.critic = closs.loss;
    auto [dz_q1, da1] = q1_.backward(q1_cache, closs.dq1);
    auto [dz_q2, da2] = q2_.backward(q2_cache, closs.dq2);
    if (!transfer_mode_) enc_online_.backward(enc_cache, Matrix<S>(dz_q1 + dz_q2));
    opt_critic_.step();

    // --- Policy update (embedding detached; critic params untouched). ---
    phase("actor");
    opt_actor_.zero_grad();
    const Matrix<S> z_pi = enc_online_.forward(x1);
    auto qmin = [&](const Matrix<S>& zq, const Matrix<S>& a, Matrix<S>* da) -> Vector<S> {
      typename QFunction<S>::Cache c1, c2;
      const Vector<S> v1 = q1_.forward(zq, a, &c1);
      const Vector<S> v2 = q2_.forward(zq, a, &c2);
      if (da) {
        const Vector<S> sel1 = (v1.array() <= v2.array()).template cast<S>();
        const Vector<S> sel2 = (S(1) - sel1.array()).matrix();
        auto [dz1u, da1u] = q1_.backward(c1, sel1, /*accum_params=*/false);
        auto [dz2u, da2u] = q2_.backward(c2, sel2, /*accum_params=*/false);
        *da = da1u + da2u;
      }
      return v1.cwiseMin(v2);
    };
    auto ares = actor_loss(policy_, z_pi, qmin, alpha, rng_actor_);
    bundle.actor = ares.loss;
    opt_actor_.step();

    // --- Temperature update (log-probs detached). ---
    phase("temperature");
    if (cfg_.learn_temperature) {
      opt_temp_.zero_grad();
      temperature_loss(temp_, ares.log_prob);
      opt_temp_.step();
    }
    bundle.temperature = temp_.value();

    // --- Auxiliary-task update over {encoder, transition, action encoder,
    //     W1, W2}; the target path stays constant. ---
    if (!transfer_mode_) {
      phase("cody");
      opt_cody_.zero_grad();
      typename StateEncoder<S>::Cache enc1_cache;
      typename ActionEncoder<S>::Cache act_cache;
      typename TransitionModel<S>::Cache trans_cache;
      CodyBatch<S> cb;
      cb.z1 = enc_online_.forward(x1, &enc1_cache);
      cb.c = act_enc_.forward(actions, &act_cache);
      cb.zhat1 = trans_online_.forward(cb.z1, cb.c, &trans_cache);
      cb.z_next = zn_target;  // target encoder unchanged since the critic phase
      if (need_view2) {
        const Matrix<S> z2 = enc_target_.forward(to_feature_map<S>(view2));
        cb.zhat2 = trans_target_.forward(z2, cb.c);
      }
      auto res = cody_total_loss(cb, cls_, LossWeights{cfg_.lambda_tmi, cfg_.eta_pred},
                                 cfg_.ablation);
      bundle.pred = res.bundle.pred;
      bundle.tmi = res.bundle.tmi;
      bundle.mvmi = res.bundle.mvmi;
      bundle.cody = res.bundle.cody;
      auto [dz1_t, dc_t] = trans_online_.backward(trans_cache, res.dzhat1);
      enc_online_.backward(enc1_cache, Matrix<S>(res.dz1 + dz1_t));
      act_enc_.backward(act_cache, Matrix<S>(res.dc + dc_t));
      opt_cody_.step();
    }

    // --- Target network EMAs. ---
    if (grad_step_ % cfg_.critic_target_update_freq == 0) {
      phase("target_q_ema");
      ema_update(collect_of(q1_target_, "q1_target"), collect_of(q1_, "q1"),
                 static_cast<S>(cfg_.q_ema));
      ema_update(collect_of(q2_target_, "q2_target"), collect_of(q2_, "q2"),
                 static_cast<S>(cfg_.q_ema));
    }
    if (!transfer_mode_) {
      phase("target_enc_ema");
      ema_update(encoder_target_params(), encoder_online_params(),
                 static_cast<S>(cfg_.encoder_ema));
      ema_update(transition_target_params(), transition_online_params(),
                 static_cast<S>(cfg_.encoder_ema));
    }

    if (!bundle.finite()) {
      std::ostringstream os;
      os << "train_step: non-finite loss at grad step " << grad_step_ << " (pred=" << bundle.pred
         << " tmi=" << bundle.tmi << " mvmi=" << bundle.mvmi << " critic=" << bundle.critic
         << " actor=" << bundle.actor << " temperature=" << bundle.temperature << ")";
      throw NumericError(os.str());
    }
    return bundle;
  }

  EvalRecord run_eval() {
    EvalRecord rec = evaluate(policy_, enc_online_, *eval_env_, cfg_.eval_episodes, rng_eval_);
    rec.env_step = env_step_;
    return rec;
  }

  /// Full interaction/update loop; writes metrics, eval records and
  /// checkpoints into run_dir.
  void train_loop(const std::string& run_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(run_dir);
    cfg_.save((fs::path(run_dir) / "config.cfg").string());
    MetricsWriter metrics((fs::path(run_dir) / "metrics.csv").string());

    using clock = std::chrono::steady_clock;
    auto window_start = clock::now();
    long window_start_step = env_step_;

    while (env_step_ < cfg_.total_env_steps) {
      env_interact();
      if (env_step_ > cfg_.init_steps) {
        const auto bundle = train_step();
        metrics.train_row(env_step_, bundle);
      }
      if (env_step_ % cfg_.eval_interval == 0) {
        EvalRecord rec = run_eval();
        const auto now = clock::now();
        const double ms =
            std::chrono::duration<double, std::milli>(now - window_start).count();
        const long steps = env_step_ - window_start_step;
        rec.wallclock_ms_per_1k = steps > 0 ? ms / static_cast<double>(steps) * 1000.0 : 0.0;
        window_start = now;
        window_start_step = env_step_;
        metrics.eval_row(rec);
        std::ostringstream name;
        name << "ckpt_" << env_step_ << ".ckpt";
        save_checkpoint((fs::path(run_dir) / name.str()).string(), cfg_.checkpoint_with_buffer);
      }
    }
    save_checkpoint((fs::path(run_dir) / "final.ckpt").string(), cfg_.checkpoint_with_buffer);
    metrics.flush();
  }

  void save_checkpoint(const std::string& path, bool with_buffer) {
    CheckpointWriter w(path);
    std::ostringstream cfg_text;
    for (const auto& [k, v] : cfg_.to_kv()) cfg_text << k << " = " << v << "\n";
    w.add_text("config", cfg_text.str());
    w.add_params("params/all", all_params());
    w.add_blob("adam/critic", serialize([&](std::ostream& os) { opt_critic_.save(os); }));
    w.add_blob("adam/actor", serialize([&](std::ostream& os) { opt_actor_.save(os); }));
    w.add_blob("adam/cody", serialize([&](std::ostream& os) { opt_cody_.save(os); }));
    w.add_blob("adam/temp", serialize([&](std::ostream& os) { opt_temp_.save(os); }));
    w.add_blob("rng/env", serialize([&](std::ostream& os) { rng_env_.save(os); }));
    w.add_blob("rng/eval", serialize([&](std::ostream& os) { rng_eval_.save(os); }));
    w.add_blob("rng/augment", serialize([&](std::ostream& os) { rng_aug_.save(os); }));
    w.add_blob("rng/policy", serialize([&](std::ostream& os) { rng_policy_.save(os); }));
    w.add_blob("rng/actor", serialize([&](std::ostream& os) { rng_actor_.save(os); }));
    w.add_blob("rng/buffer", serialize([&](std::ostream& os) { rng_buffer_.save(os); }));
    w.add_blob("env/train", serialize([&](std::ostream& os) { env_->save_state(os); }));
    w.add_blob("env/eval", serialize([&](std::ostream& os) { eval_env_->save_state(os); }));
    w.add_counters("counters", {{"env_step", env_step_},
                                {"grad_step", grad_step_},
                                {"have_obs", have_obs_ ? 1 : 0},
                                {"transfer_mode", transfer_mode_ ? 1 : 0}});
    if (with_buffer)
      w.add_blob("buffer", serialize([&](std::ostream& os) { buffer_.save(os); }));
  }

  /// Rebuilds a session from a checkpoint. Training resumed from here
  /// reproduces the original run only if the buffer was checkpointed.
  static std::unique_ptr<TrainSession<S>> restore(const std::string& path) {
    CheckpointReader r(path);
    TrainConfig cfg;
    std::istringstream cfg_is(r.text("config"));
    cfg.merge(cfg_is);
    const auto counters = r.read_counters("counters");
    const bool transfer = counters.count("transfer_mode") && counters.at("transfer_mode") != 0;
    auto s = std::make_unique<TrainSession<S>>(cfg, transfer);
    r.read_params("params/all", s->all_params());
    deserialize(r.text("adam/critic"), [&](std::istream& is) { s->opt_critic_.load(is); });
    deserialize(r.text("adam/actor"), [&](std::istream& is) { s->opt_actor_.load(is); });
    deserialize(r.text("adam/cody"), [&](std::istream& is) { s->opt_cody_.load(is); });
    deserialize(r.text("adam/temp"), [&](std::istream& is) { s->opt_temp_.load(is); });
    deserialize(r.text("rng/env"), [&](std::istream& is) { s->rng_env_.load(is); });
    deserialize(r.text("rng/eval"), [&](std::istream& is) { s->rng_eval_.load(is); });
    deserialize(r.text("rng/augment"), [&](std::istream& is) { s->rng_aug_.load(is); });
    deserialize(r.text("rng/policy"), [&](std::istream& is) { s->rng_policy_.load(is); });
    deserialize(r.text("rng/actor"), [&](std::istream& is) { s->rng_actor_.load(is); });
    deserialize(r.text("rng/buffer"), [&](std::istream& is) { s->rng_buffer_.load(is); });
    deserialize(r.text("env/train"), [&](std::istream& is) { s->env_->load_state(is); });
    deserialize(r.text("env/eval"), [&](std::istream& is) { s->eval_env_->load_state(is); });
    s->env_step_ = counters.at("env_step");
    s->grad_step_ = counters.at("grad_step");
    s->have_obs_ = counters.at("have_obs") != 0;
    if (s->have_obs_)
      s->obs_ = static_cast<PixelEnvBase*>(s->env_.get())->current_observation();
    if (r.has("buffer")) {
      std::istringstream is(r.text("buffer"), std::ios::binary);
      s->buffer_ = ReplayBuffer::load(is);
    }
    return s;
  }

  /// Replaces the online and target encoder with the one stored in a source
  /// checkpoint (transfer protocol). Shapes must match the current env.
  void load_frozen_encoder(const std::string& source_ckpt) {
    check(transfer_mode_, "load_frozen_encoder: session must be in transfer mode");
    CheckpointReader r(source_ckpt);
    Params<S> mine;
    enc_online_.collect(mine, "enc_online");
    // The source's target encoder is ignored: the frozen encoder serves both
    // roles (they coincide once updates stop).
    read_subset(r, mine);
    copy_params(encoder_target_params(), encoder_online_params());
  }

 private:
  template <typename Fn>
  static std::string serialize(Fn&& fn) {
    std::ostringstream os(std::ios::binary);
    fn(os);
    return os.str();
  }
  template <typename Fn>
  static void deserialize(const std::string& blob, Fn&& fn) {
    std::istringstream is(blob, std::ios::binary);
    fn(is);
  }

  void read_subset(const CheckpointReader& r, const Params<S>& subset) {
    // Pull the named tensors out of params/all and copy the requested ones.
    std::istringstream is(r.text("params/all"), std::ios::binary);
    std::uint64_t count = 0;
    is.read(reinterpret_cast<char*>(&count), 8);
    std::map<std::string, Matrix<S>> tensors;
    for (std::uint64_t i = 0; i < count; ++i) {
      std::uint32_t n = 0;
      is.read(reinterpret_cast<char*>(&n), 4);
      std::string name(n, '\0');
      is.read(name.data(), n);
      std::uint64_t rows = 0, cols = 0;
      std::uint32_t ssize = 0;
      is.read(reinterpret_cast<char*>(&rows), 8);
      is.read(reinterpret_cast<char*>(&cols), 8);
      is.read(reinterpret_cast<char*>(&ssize), 4);
      check(ssize == sizeof(S), "checkpoint: scalar width mismatch");
      Matrix<S> m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
      is.read(reinterpret_cast<char*>(m.data()),
              static_cast<std::streamsize>(sizeof(S) * static_cast<std::size_t>(m.size())));
      tensors[name] = std::move(m);
    }
    for (const auto& p : subset) {
      auto it = tensors.find(p.name);
      check(it != tensors.end(), "checkpoint: missing tensor " + p.name);
      check_shape(it->second.rows() == p.param->value.rows() &&
                      it->second.cols() == p.param->value.cols(),
                  "encoder/observation shape mismatch for " + p.name);
      p.param->value = it->second;
    }
  }

  template <typename Net>
  Params<S> collect_of(Net& net, const std::string& prefix) {
    Params<S> ps;
    net.collect(ps, prefix);
    return ps;
  }

  void phase(const char* name) {
    if (phase_log_enabled_) phase_log_.emplace_back(name);
  }

  TrainConfig cfg_;
  bool transfer_mode_ = false;

  std::unique_ptr<PixelEnv> env_;
  std::unique_ptr<PixelEnv> eval_env_;
  ReplayBuffer buffer_;
  AugmentSpec aug_;

  StateEncoder<S> enc_online_, enc_target_;
  ActionEncoder<S> act_enc_;
  TransitionModel<S> trans_online_, trans_target_;
  QFunction<S> q1_, q2_, q1_target_, q2_target_;
  GaussianPolicy<S> policy_;
  ClassifierWeights<S> cls_;
  Temperature<S> temp_;

  Adam<S> opt_critic_, opt_actor_, opt_cody_, opt_temp_;

  Rng rng_init_, rng_env_, rng_eval_, rng_aug_, rng_policy_, rng_actor_, rng_buffer_;

  Observation obs_;
  bool have_obs_ = false;
  long env_step_ = 0;
  long grad_step_ = 0;

  bool phase_log_enabled_ = false;
  std::vector<std::string> phase_log_;
};

}  // namespace cody
