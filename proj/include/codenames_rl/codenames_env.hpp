#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "codenames_rl/ann_index.hpp"
#include "codenames_rl/embedding_store.hpp"
#include "codenames_rl/error.hpp"
#include "codenames_rl/game.hpp"
#include "codenames_rl/guessers.hpp"
#include "codenames_rl/policies.hpp"
#include "codenames_rl/scoring.hpp"
#include "codenames_rl/seed.hpp"

namespace codenames_rl {

using nlohmann::json;

/// Row-major real matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

inline json to_json_value(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows; ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

enum class Encoding : std::uint8_t { Pwcsm, Ohwe };

inline constexpr std::size_t kLabelRows = 4;
inline constexpr std::size_t kStatusRows = 2;

struct OpponentConfig {
  bool enabled = true;  // scripted greedy g_mean spymaster with the env's guessers
};

struct EnvConfig {
  Encoding encoding = Encoding::Pwcsm;
  std::size_t j = 1;
  std::size_t vocab_size = 400;
  std::vector<Strategy> strategies{Strategy::Mean, Strategy::Minimax};
  std::size_t kappa = 10;
  double minimax_threshold = 0.3;
  double kim_threshold = 0.7;
  BadWordWeights bad_word_weights;
  GuesserParams guesser;
  OpponentConfig opponent;
  std::size_t max_turns = 25;
  std::uint64_t seed = 0;
  std::size_t search_probes = 0;

  std::size_t action_size() const { return 2 * kBoardSize + strategies.size() * kappa; }

  void validate() const {
    if (j < 1) throw Error(errc::kInvalidConfig, "j must be >= 1");
    if (encoding == Encoding::Ohwe && (vocab_size == 0 || vocab_size % kBoardSize != 0)) {
      throw Error(errc::kInvalidConfig, "vocab_size must be a positive multiple of 25");
    }
    if (strategies.empty()) throw Error(errc::kInvalidConfig, "at least one strategy is required");
    if (kappa < 1) throw Error(errc::kInvalidConfig, "kappa must be >= 1");
    if (max_turns < 1) throw Error(errc::kInvalidConfig, "max_turns must be >= 1");
    codenames_rl::validate(guesser);
  }
};

inline std::string_view to_string(Encoding e) { return e == Encoding::Pwcsm ? "pwcsm" : "ohwe"; }
inline Encoding encoding_from_string(std::string_view s) {
  if (s == "pwcsm") return Encoding::Pwcsm;
  if (s == "ohwe") return Encoding::Ohwe;
  throw Error(errc::kInvalidConfig, "unknown encoding: " + std::string(s));
}
inline std::string_view to_string(GuesserMode m) { return m == GuesserMode::Greedy ? "greedy" : "stochastic"; }
inline GuesserMode guesser_mode_from_string(std::string_view s) {
  if (s == "greedy") return GuesserMode::Greedy;
  if (s == "stochastic") return GuesserMode::Stochastic;
  throw Error(errc::kInvalidConfig, "unknown guesser mode: " + std::string(s));
}

inline json to_json_value(const EnvConfig& c) {
  json strategies = json::array();
  for (auto s : c.strategies) strategies.push_back(to_string(s));
  return {
      {"encoding", to_string(c.encoding)},
      {"j", c.j},
      {"vocab_size", c.vocab_size},
      {"strategies", strategies},
      {"kappa", c.kappa},
      {"minimax_threshold", c.minimax_threshold},
      {"kim_threshold", c.kim_threshold},
      {"bad_word_weights",
       {{"bystander", c.bad_word_weights.bystander},
        {"opposing", c.bad_word_weights.opposing},
        {"assassin", c.bad_word_weights.assassin}}},
      {"guesser",
       {{"mode", to_string(c.guesser.mode)},
        {"lambda", c.guesser.lambda},
        {"tau", c.guesser.tau},
        {"seed", c.guesser.seed}}},
      {"opponent", {{"enabled", c.opponent.enabled}}},
      {"max_turns", c.max_turns},
      {"seed", c.seed},
      {"search_probes", c.search_probes},
  };
}

/// Overlays the keys present in `j` onto `base`. Unknown keys are rejected.
inline EnvConfig apply_json(EnvConfig c, const json& j) {
  if (!j.is_object()) throw Error(errc::kInvalidConfig, "config must be a JSON object");
  auto expect = [](const json& obj, std::initializer_list<const char*> keys, const char* where) {
    for (const auto& [k, v] : obj.items()) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; })) {
        throw Error(errc::kInvalidConfig, std::string("unknown config key '") + k + "' in " + where);
      }
    }
  };
  try {
    expect(j,
           {"encoding", "j", "vocab_size", "strategies", "kappa", "minimax_threshold", "kim_threshold",
            "bad_word_weights", "guesser", "opponent", "max_turns", "seed", "search_probes"},
           "config");
    if (j.contains("encoding")) c.encoding = encoding_from_string(j["encoding"].get<std::string>());
    if (j.contains("j")) c.j = j["j"].get<std::size_t>();
    if (j.contains("vocab_size")) c.vocab_size = j["vocab_size"].get<std::size_t>();
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j["strategies"]) c.strategies.push_back(strategy_from_string(s.get<std::string>()));
    }
    if (j.contains("kappa")) c.kappa = j["kappa"].get<std::size_t>();
    if (j.contains("minimax_threshold")) c.minimax_threshold = j["minimax_threshold"].get<double>();
    if (j.contains("kim_threshold")) c.kim_threshold = j["kim_threshold"].get<double>();
    if (j.contains("bad_word_weights")) {
      const auto& w = j["bad_word_weights"];
      expect(w, {"bystander", "opposing", "assassin"}, "bad_word_weights");
      if (w.contains("bystander")) c.bad_word_weights.bystander = w["bystander"].get<double>();
      if (w.contains("opposing")) c.bad_word_weights.opposing = w["opposing"].get<double>();
      if (w.contains("assassin")) c.bad_word_weights.assassin = w["assassin"].get<double>();
    }
    if (j.contains("guesser")) {
      const auto& g = j["guesser"];
      expect(g, {"mode", "lambda", "tau", "seed"}, "guesser");
      if (g.contains("mode")) c.guesser.mode = guesser_mode_from_string(g["mode"].get<std::string>());
      if (g.contains("lambda")) c.guesser.lambda = g["lambda"].get<double>();
      if (g.contains("tau")) c.guesser.tau = g["tau"].get<double>();
      if (g.contains("seed")) c.guesser.seed = g["seed"].get<std::uint64_t>();
    }
    if (j.contains("opponent")) {
      expect(j["opponent"], {"enabled"}, "opponent");
      if (j["opponent"].contains("enabled")) c.opponent.enabled = j["opponent"]["enabled"].get<bool>();
    }
    if (j.contains("max_turns")) c.max_turns = j["max_turns"].get<std::size_t>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("search_probes")) c.search_probes = j["search_probes"].get<std::size_t>();
  } catch (const json::exception& e) {
    throw Error(errc::kInvalidConfig, std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

/// Read-only data shared by every environment instance: the embedding
/// store(s), the clue-candidate index, and the board deck.
struct Resources {
  std::shared_ptr<const EmbeddingStore> store;
  std::vector<std::shared_ptr<const EmbeddingStore>> extra_stores;  // further PWCSM similarity sources
  std::shared_ptr<const PartitionedIndex> index;
  std::vector<std::string> wordlist;
  std::unordered_map<std::string, std::size_t> deck_position;

  static constexpr std::size_t kDefaultClueLimit = 50000;

  /// Clue vocabulary: the first `clue_limit` purely alphabetic store words.
  static std::vector<RowId> clue_rows(const EmbeddingStore& store, std::size_t clue_limit) {
    std::vector<RowId> rows;
    const std::size_t n = std::min(clue_limit, store.size());
    for (RowId r = 0; r < n; ++r) {
      const auto& w = store.word(r);
      if (std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; })) rows.push_back(r);
    }
    return rows;
  }

  /// Builds the clue index in place; pass `index` to reuse a cached one.
  static std::shared_ptr<const Resources> create(std::shared_ptr<const EmbeddingStore> store,
                                                 std::vector<std::string> wordlist,
                                                 std::size_t clue_limit = kDefaultClueLimit,
                                                 std::size_t partitions = 0, std::uint64_t index_seed = 0,
                                                 std::shared_ptr<const PartitionedIndex> index = nullptr) {
    auto res = std::make_shared<Resources>();
    if (!store) throw Error(errc::kBadInput, "resources need an embedding store");
    for (const auto& w : wordlist) {
      if (!store->contains(w)) throw Error(errc::kUnknownWord, "wordlist word not in embedding vocabulary: " + w);
    }
    if (wordlist.size() < kBoardSize) throw Error(errc::kBadInput, "wordlist needs at least 25 words");
    if (!index) {
      const auto rows = clue_rows(*store, clue_limit);
      if (rows.empty()) throw Error(errc::kBadInput, "empty clue vocabulary");
      const std::size_t p = partitions ? partitions : PartitionedIndex::default_partitions(rows.size());
      index = std::make_shared<const PartitionedIndex>(PartitionedIndex::build(*store, p, index_seed, rows));
    } else if (&index->store() != store.get()) {
      throw Error(errc::kBadInput, "index was built over a different store");
    }
    res->store = std::move(store);
    res->index = std::move(index);
    for (std::size_t i = 0; i < wordlist.size(); ++i) res->deck_position.emplace(wordlist[i], i);
    res->wordlist = std::move(wordlist);
    return res;
  }
};

/// j pairwise similarity blocks, then the label, mask and progress rows.
inline Matrix encode_pwcsm(const GameState& state, std::span<const EmbeddingStore* const> stores, Team perspective) {
  if (stores.empty()) throw Error(errc::kBadInput, "PWCSM needs at least one store");
  Matrix obs(kBoardSize * stores.size() + kLabelRows + kStatusRows, kBoardSize);
  for (std::size_t s = 0; s < stores.size(); ++s) {
    std::array<RowId, kBoardSize> rows{};
    for (std::size_t p = 0; p < kBoardSize; ++p) rows[p] = stores[s]->row(state.words[p]);
    for (std::size_t a = 0; a < kBoardSize; ++a) {
      for (std::size_t b = 0; b < kBoardSize; ++b) {
        obs(s * kBoardSize + a, b) = a == b ? 1.0 : stores[s]->cosine_similarity(rows[a], rows[b]);
      }
    }
  }
  const std::size_t base = kBoardSize * stores.size();
  for (std::size_t p = 0; p < kBoardSize; ++p) {
    obs(base + static_cast<std::size_t>(state.normalized(p, perspective)), p) = 1.0;
    obs(base + kLabelRows, p) = state.revealed[p] ? 1.0 : 0.0;
    obs(base + kLabelRows + 1, p) = static_cast<double>(state.remaining(perspective)) / kFirstTeamWords;
  }
  return obs;
}

/// Wrapped one-hot deck membership, then the same label and status rows.
inline Matrix encode_ohwe(const GameState& state, const std::unordered_map<std::string, std::size_t>& deck_position,
                          std::size_t vocab_size, Team perspective) {
  if (vocab_size == 0 || vocab_size % kBoardSize != 0) {
    throw Error(errc::kInvalidConfig, "vocab_size must be a positive multiple of 25");
  }
  const std::size_t block = vocab_size / kBoardSize;
  Matrix obs(block + kLabelRows + kStatusRows, kBoardSize);
  for (std::size_t p = 0; p < kBoardSize; ++p) {
    if (state.words[p].empty()) continue;
    const auto it = deck_position.find(state.words[p]);
    if (it == deck_position.end() || it->second >= vocab_size) {
      throw Error(errc::kUnknownWord, "board word outside the " + std::to_string(vocab_size) +
                                          "-word vocabulary: " + state.words[p]);
    }
    obs(it->second / kBoardSize, it->second % kBoardSize) = 1.0;
  }
  for (std::size_t p = 0; p < kBoardSize; ++p) {
    obs(block + static_cast<std::size_t>(state.normalized(p, perspective)), p) = 1.0;
    obs(block + kLabelRows, p) = state.revealed[p] ? 1.0 : 0.0;
    obs(block + kLabelRows + 1, p) = static_cast<double>(state.remaining(perspective)) / kFirstTeamWords;
  }
  return obs;
}

/// [remaining own words, opponent finished, assassin revealed, 0 x 22].
inline std::vector<double> goal_vector(const GameState& state, Team perspective) {
  std::vector<double> g(kBoardSize, 0.0);
  g[0] = state.remaining(perspective);
  g[1] = state.finished[static_cast<std::size_t>(other(perspective))] ? 1.0 : 0.0;
  g[2] = state.assassin_revealed_by.has_value() ? 1.0 : 0.0;
  return g;
}

struct DecodedAction {
  std::vector<std::size_t> targets;  // board positions, ascending
  std::size_t strategy_index = 0;
  std::size_t rank = 0;

  bool operator==(const DecodedAction&) const = default;
};

/// Position p is targeted iff a[2p] > a[2p+1] and p is an unrevealed own
/// word. With nothing selected, the own word with the largest margin is
/// used. The trailing |G|*kappa block picks (strategy, rank) by argmax.
inline DecodedAction decode_action(std::span<const double> a, const GameState& state, const EnvConfig& config,
                                   Team perspective) {
  if (a.size() != config.action_size()) {
    throw Error(errc::kBadInput, "action length " + std::to_string(a.size()) + " != " +
                                     std::to_string(config.action_size()));
  }
  DecodedAction d;
  std::optional<std::size_t> fallback;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < kBoardSize; ++p) {
    if (state.revealed[p] || state.normalized(p, perspective) != NormalizedLabel::Mine) continue;
    const double margin = a[2 * p] - a[2 * p + 1];
    if (margin > 0.0) d.targets.push_back(p);
    if (margin > best_margin) {
      best_margin = margin;
      fallback = p;
    }
  }
  if (d.targets.empty() && fallback) d.targets.push_back(*fallback);
  const auto tail = a.subspan(2 * kBoardSize);
  const auto pick = static_cast<std::size_t>(std::max_element(tail.begin(), tail.end()) - tail.begin());
  d.strategy_index = pick / config.kappa;
  d.rank = pick % config.kappa;
  return d;
}

inline std::vector<double> encode_action(const DecodedAction& d, const EnvConfig& config) {
  std::vector<double> a(config.action_size(), 0.0);
  for (std::size_t p = 0; p < kBoardSize; ++p) a[2 * p + 1] = 1.0;
  for (std::size_t p : d.targets) {
    a[2 * p] = 1.0;
    a[2 * p + 1] = 0.0;
  }
  a[2 * kBoardSize + d.strategy_index * config.kappa + d.rank] = 1.0;
  return a;
}

struct ResetResult {
  Matrix observation;
  std::vector<double> goal;
};

struct StepResult {
  Matrix observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
  std::vector<double> goal;
  json info;
};

inline json outcomes_to_json(const std::vector<GuessOutcome>& outs) {
  json a = json::array();
  for (const auto& o : outs) a.push_back({{"word", o.word}, {"label", to_string(o.label)}});
  return a;
}

/// The spymaster MDP. One instance owns one episode stream.
class CodenamesEnv {
 public:
  CodenamesEnv(std::shared_ptr<const Resources> resources, EnvConfig config)
      : res_(std::move(resources)), config_(std::move(config)) {
    if (!res_) throw Error(errc::kInvalidConfig, "codenames env needs embeddings and a wordlist");
    config_.validate();
    if (config_.encoding == Encoding::Pwcsm && config_.j != 1 + res_->extra_stores.size()) {
      throw Error(errc::kInvalidConfig, "j = " + std::to_string(config_.j) + " but " +
                                            std::to_string(1 + res_->extra_stores.size()) +
                                            " embedding stores are loaded");
    }
    stores_.push_back(res_->store.get());
    for (const auto& s : res_->extra_stores) stores_.push_back(s.get());
  }

  const EnvConfig& config() const { return config_; }
  const GameState& state() const { return state_; }
  const Resources& resources() const { return *res_; }
  std::size_t action_size() const { return config_.action_size(); }
  std::pair<std::size_t, std::size_t> observation_shape() const {
    const std::size_t head =
        config_.encoding == Encoding::Pwcsm ? kBoardSize * config_.j : config_.vocab_size / kBoardSize;
    return {head + kLabelRows + kStatusRows, kBoardSize};
  }
  bool episode_over() const { return !started_ || state_.game_over || truncated_; }
  std::size_t steps() const { return steps_; }
  std::uint64_t episode_seed() const { return episode_seed_; }

  /// New board. Without a seed, episode i of the instance uses
  /// derive_seed(config.seed, i).
  ResetResult reset(std::optional<std::uint64_t> seed = std::nullopt) {
    episode_seed_ = seed ? *seed : derive_seed(config_.seed, episodes_);
    ++episodes_;
    state_ = new_game(res_->wordlist, *res_->store, episode_seed_, true);
    guesser_rng_.seed(derive_seed(episode_seed_, config_.guesser.seed));
    steps_ = 0;
    truncated_ = false;
    started_ = true;
    return {observe(), goal_vector(state_, state_.agent_team)};
  }

  StepResult step(std::span<const double> action) {
    require_running();
    const auto decoded = decode_action(action, state_, config_, state_.agent_team);
    const Strategy strategy = config_.strategies[decoded.strategy_index];
    const auto targets = make_target_set(state_, decoded.targets, state_.agent_team);
    ScoringParams params;
    params.strategy = strategy;
    params.lambda_t = strategy == Strategy::KimEnergy ? config_.kim_threshold : config_.minimax_threshold;
    params.weights = config_.bad_word_weights;
    params.kappa = config_.kappa;
    params.probes = config_.search_probes;

    json decode_info = {{"targets", json::array()}, {"strategy", to_string(strategy)}, {"rank", decoded.rank}};
    for (auto p : decoded.targets) decode_info["targets"].push_back(state_.words[p]);
    Hint hint;
    hint.count = static_cast<int>(targets.size());
    try {
      const auto cands = generate_candidates(targets, state_, params, *res_->index);
      hint.clue = cands[std::min(decoded.rank, cands.size() - 1)].word;
      decode_info["candidates"] = cands.size();
    } catch (const Error& e) {
      if (e.code() != errc::kBarrenTargetSet) throw;
      const auto near = nearest_legal_word(state_, res_->store->mean_vector(targets.rows), *res_->index);
      if (!near) throw;
      hint.clue = near->word;
      decode_info["candidates"] = 0;
      decode_info["fallback"] = true;
    }
    auto result = step_hint(hint);
    result.info["decoded"] = std::move(decode_info);
    return result;
  }

  /// Advances one agent step with an explicit hint: agent guessers, then the
  /// scripted opponent's full turn.
  StepResult step_hint(const Hint& hint) {
    require_running();
    const GameState prev = state_;
    const Team agent = state_.agent_team;
    auto turn = simulate_team_turn(state_, hint, config_.guesser, *res_->store, guesser_rng_);
    state_ = std::move(turn.state);
    json info = {{"hint", {{"clue", hint.clue}, {"count", hint.count}}},
                 {"guesses", outcomes_to_json(turn.outcomes)}};
    if (!state_.game_over && state_.acting_team != agent) {
      if (config_.opponent.enabled && state_.remaining(state_.acting_team) > 0) {
        const Hint opp = greedy_policy(state_, *res_->index, config_.search_probes);
        auto opp_turn = simulate_team_turn(state_, opp, config_.guesser, *res_->store, guesser_rng_);
        state_ = std::move(opp_turn.state);
        info["opponent"] = {{"hint", {{"clue", opp.clue}, {"count", opp.count}}},
                            {"guesses", outcomes_to_json(opp_turn.outcomes)}};
      } else {
        end_turn(state_);
      }
    }
    ++steps_;
    StepResult r;
    r.reward = reward(prev, state_, agent);
    r.terminated = state_.game_over;
    r.truncated = !r.terminated && steps_ >= config_.max_turns;
    truncated_ = r.truncated;
    r.observation = observe();
    r.goal = goal_vector(state_, agent);
    if (state_.game_over && state_.winner) info["winner"] = to_string(*state_.winner);
    r.info = std::move(info);
    return r;
  }

  Matrix observe() const {
    if (config_.encoding == Encoding::Pwcsm) {
      return encode_pwcsm(state_, std::span<const EmbeddingStore* const>(stores_), state_.agent_team);
    }
    return encode_ohwe(state_, res_->deck_position, config_.vocab_size, state_.agent_team);
  }

 private:
  void require_running() const {
    if (!started_) throw Error(errc::kOutOfPhase, "reset the environment before stepping");
    if (state_.game_over || truncated_) throw Error(errc::kEpisodeOver, "episode is over; call reset");
  }

  std::shared_ptr<const Resources> res_;
  EnvConfig config_;
  std::vector<const EmbeddingStore*> stores_;
  GameState state_;
  std::mt19937_64 guesser_rng_;
  std::uint64_t episode_seed_ = 0;
  std::uint64_t episodes_ = 0;
  std::size_t steps_ = 0;
  bool truncated_ = false;
  bool started_ = false;
};

/// JSON-lines trajectory: a reset record, then one record per step holding
/// the hint, every guess with its revealed label, and the reward.
inline json trajectory_reset_event(const CodenamesEnv& env) {
  return {{"event", "reset"}, {"seed", env.episode_seed()}, {"board", env.state().words}};
}
inline json trajectory_step_event(const StepResult& r) {
  json e = {{"event", "step"}, {"reward", r.reward}, {"terminated", r.terminated}, {"truncated", r.truncated}};
  e["hint"] = r.info.at("hint");
  e["guesses"] = r.info.at("guesses");
  if (r.info.contains("opponent")) e["opponent"] = r.info["opponent"];
  return e;
}

/// Re-runs a logged trajectory through `env` (same config) and reports
/// whether every reward and reveal matches.
inline bool replay_trajectory(CodenamesEnv& env, const std::vector<json>& events) {
  bool started = false;
  for (const auto& e : events) {
    if (e.at("event") == "reset") {
      env.reset(e.at("seed").get<std::uint64_t>());
      if (env.state().words != e.at("board").get<std::array<std::string, kBoardSize>>()) return false;
      started = true;
    } else if (e.at("event") == "step") {
      if (!started) return false;
      const Hint h{e.at("hint").at("clue").get<std::string>(), e.at("hint").at("count").get<int>()};
      const auto r = env.step_hint(h);
      if (r.reward != e.at("reward").get<double>() || r.info.at("guesses") != e.at("guesses")) return false;
    }
  }
  return started;
}

}  // namespace codenames_rl
