// Minimal end-to-end run: a few hundred steps of joint SAC + auxiliary-task
// training on the pixel point-mass task at a small scale.

#include <iostream>

#include "cody/trainer.hpp"

int main() {
  cody::TrainConfig cfg;
  cfg.env_name = "point_mass";
  cfg.seed = 1;
  cfg.image_size = 32;
  cfg.frame_stack = 3;
  cfg.conv_channels = 8;
  cfg.conv_strides = {2, 2, 1, 1};
  cfg.batch_size = 16;
  cfg.critic_hidden = 128;
  cfg.transition_hidden = 128;
  cfg.action_hidden = 64;
  cfg.init_steps = 100;
  cfg.total_env_steps = 400;
  cfg.eval_interval = 200;
  cfg.eval_episodes = 2;
  cfg.max_shift = 3;

  cody::TrainSession<float> session(cfg);
  session.train_loop("runs/demo_pointmass");
  std::cout << "gradient steps: " << session.grad_steps() << "\n";
  return 0;
}
