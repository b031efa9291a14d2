#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "codenames_rl/codenames_env.hpp"
#include "codenames_rl/error.hpp"
#include "codenames_rl/seed.hpp"

namespace codenames_rl {

struct ToyStep {
  Matrix observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

struct ClickPixelConfig {
  std::size_t q = 5;
  bool one_move = false;
  bool linear_reward = false;
  std::size_t max_steps = 100;
  std::uint64_t seed = 0;

  void validate() const {
    if (q < 2) throw Error(errc::kInvalidConfig, "clickpixel q must be >= 2");
    if (max_steps < 1) throw Error(errc::kInvalidConfig, "clickpixel max_steps must be >= 1");
  }
};

/// One hidden target cell on a q x q grid. Observation: target 1.0, cells
/// already clicked 0.5, everything else 0.
class ClickPixelEnv {
 public:
  static constexpr double kTarget = 1.0;
  static constexpr double kClicked = 0.5;

  explicit ClickPixelEnv(ClickPixelConfig config) : config_(config) { config_.validate(); }

  const ClickPixelConfig& config() const { return config_; }
  std::size_t cells() const { return config_.q * config_.q; }
  std::size_t target() const { return target_; }

  Matrix reset(std::optional<std::uint64_t> seed = std::nullopt) {
    rng_.seed(seed ? *seed : derive_seed(config_.seed, episodes_));
    ++episodes_;
    std::uniform_int_distribution<std::size_t> cell(0, cells() - 1);
    target_ = cell(rng_);
    clicked_.assign(cells(), false);
    steps_ = 0;
    over_ = false;
    started_ = true;
    return observe();
  }

  ToyStep step(std::size_t action) {
    if (!started_) throw Error(errc::kOutOfPhase, "reset the environment before stepping");
    if (over_) throw Error(errc::kEpisodeOver, "episode is over; call reset");
    if (action >= cells()) throw Error(errc::kBadInput, "clickpixel action out of range");
    ++steps_;
    ToyStep r;
    if (action == target_) {
      r.reward = 0.0;
      r.terminated = true;
    } else {
      clicked_[action] = true;
      r.reward = config_.linear_reward ? -static_cast<double>(steps_) : -1.0;
      r.terminated = config_.one_move;
      r.truncated = !r.terminated && steps_ >= config_.max_steps;
    }
    over_ = r.terminated || r.truncated;
    r.observation = observe();
    return r;
  }

  Matrix observe() const {
    Matrix m(config_.q, config_.q);
    for (std::size_t c = 0; c < cells(); ++c) {
      if (clicked_[c]) m.data[c] = kClicked;
    }
    m.data[target_] = kTarget;
    return m;
  }

 private:
  ClickPixelConfig config_;
  std::mt19937_64 rng_;
  std::uint64_t episodes_ = 0;
  std::size_t target_ = 0;
  std::vector<bool> clicked_;
  std::size_t steps_ = 0;
  bool over_ = false;
  bool started_ = false;
};

struct WhackConfig {
  std::size_t q = 5;
  std::size_t episode_len = 99;
  double highlight_prob = 0.5;
  std::uint64_t seed = 0;

  void validate() const {
    if (q < 2) throw Error(errc::kInvalidConfig, "whack q must be >= 2");
    if (episode_len < 1) throw Error(errc::kInvalidConfig, "whack episode_len must be >= 1");
    if (highlight_prob < 0.0 || highlight_prob > 1.0) throw Error(errc::kInvalidConfig, "highlight_prob outside [0,1]");
  }
};

/// Whack-a-Mole: select exactly the highlighted cells. Reward per step is the
/// fraction of cells classified correctly; a fresh highlight is drawn after
/// every step. Action components >= 0.5 count as "selected".
class WhackEnv {
 public:
  explicit WhackEnv(WhackConfig config) : config_(config) { config_.validate(); }

  const WhackConfig& config() const { return config_; }
  std::size_t cells() const { return config_.q * config_.q; }
  const std::vector<bool>& highlighted() const { return highlight_; }

  Matrix reset(std::optional<std::uint64_t> seed = std::nullopt) {
    rng_.seed(seed ? *seed : derive_seed(config_.seed, episodes_));
    ++episodes_;
    steps_ = 0;
    started_ = true;
    draw();
    return observe();
  }

  ToyStep step(std::span<const double> action) {
    if (!started_) throw Error(errc::kOutOfPhase, "reset the environment before stepping");
    if (steps_ >= config_.episode_len) throw Error(errc::kEpisodeOver, "episode is over; call reset");
    if (action.size() != cells()) {
      throw Error(errc::kBadInput, "whack action needs " + std::to_string(cells()) + " entries");
    }
    std::size_t correct = 0;
    for (std::size_t c = 0; c < cells(); ++c) correct += ((action[c] >= 0.5) == highlight_[c]) ? 1 : 0;
    ++steps_;
    ToyStep r;
    r.reward = static_cast<double>(correct) / static_cast<double>(cells());
    r.truncated = steps_ >= config_.episode_len;
    draw();
    r.observation = observe();
    return r;
  }

  Matrix observe() const {
    Matrix m(config_.q, config_.q);
    for (std::size_t c = 0; c < cells(); ++c) m.data[c] = highlight_[c] ? 1.0 : 0.0;
    return m;
  }

 private:
  void draw() {
    std::bernoulli_distribution on(config_.highlight_prob);
    highlight_.assign(cells(), false);
    for (std::size_t c = 0; c < cells(); ++c) highlight_[c] = on(rng_);
  }

  WhackConfig config_;
  std::mt19937_64 rng_;
  std::uint64_t episodes_ = 0;
  std::vector<bool> highlight_;
  std::size_t steps_ = 0;
  bool started_ = false;
};

inline ClickPixelConfig apply_json(ClickPixelConfig c, const json& j) {
  if (!j.is_object()) throw Error(errc::kInvalidConfig, "config must be a JSON object");
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "q") c.q = v.get<std::size_t>();
      else if (k == "one_move") c.one_move = v.get<bool>();
      else if (k == "linear_reward") c.linear_reward = v.get<bool>();
      else if (k == "max_steps") c.max_steps = v.get<std::size_t>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else throw Error(errc::kInvalidConfig, "unknown clickpixel config key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw Error(errc::kInvalidConfig, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

inline WhackConfig apply_json(WhackConfig c, const json& j) {
  if (!j.is_object()) throw Error(errc::kInvalidConfig, "config must be a JSON object");
  try {
    for (const auto& [k, v] : j.items()) {
      if (k == "q") c.q = v.get<std::size_t>();
      else if (k == "episode_len") c.episode_len = v.get<std::size_t>();
      else if (k == "highlight_prob") c.highlight_prob = v.get<double>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else throw Error(errc::kInvalidConfig, "unknown whack config key '" + k + "'");
    }
  } catch (const json::exception& e) {
    throw Error(errc::kInvalidConfig, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace codenames_rl
