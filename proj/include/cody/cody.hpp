#pragma once

#include "cody/adam.hpp"
#include "cody/augment.hpp"
#include "cody/checkpoint.hpp"
#include "cody/codyloss.hpp"
#include "cody/common.hpp"
#include "cody/config.hpp"
#include "cody/envs.hpp"
#include "cody/evalbench.hpp"
#include "cody/metrics.hpp"
#include "cody/nets.hpp"
#include "cody/nn.hpp"
#include "cody/param.hpp"
#include "cody/plot.hpp"
#include "cody/replay.hpp"
#include "cody/report.hpp"
#include "cody/rng.hpp"
#include "cody/rollout.hpp"
#include "cody/sac.hpp"
#include "cody/trainer.hpp"
