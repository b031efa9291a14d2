#pragma once

#include "codenames_rl/ann_index.hpp"
#include "codenames_rl/codenames_env.hpp"
#include "codenames_rl/embedding_store.hpp"
#include "codenames_rl/error.hpp"
#include "codenames_rl/eval.hpp"
#include "codenames_rl/game.hpp"
#include "codenames_rl/guessers.hpp"
#include "codenames_rl/play.hpp"
#include "codenames_rl/policies.hpp"
#include "codenames_rl/protocol.hpp"
#include "codenames_rl/scoring.hpp"
#include "codenames_rl/seed.hpp"
#include "codenames_rl/synthetic.hpp"
#include "codenames_rl/toy_envs.hpp"
#include "codenames_rl/transport.hpp"
