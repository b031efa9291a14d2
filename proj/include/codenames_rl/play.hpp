#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "codenames_rl/codenames_env.hpp"
#include "codenames_rl/error.hpp"
#include "codenames_rl/game.hpp"
#include "codenames_rl/guessers.hpp"
#include "codenames_rl/policies.hpp"
#include "codenames_rl/seed.hpp"

namespace codenames_rl {

enum class PlayRole : std::uint8_t { HumanGuesser, HumanSpymaster };

inline std::string_view to_string(PlayRole r) { return r == PlayRole::HumanGuesser ? "human_guesser" : "human_spymaster"; }
inline PlayRole play_role_from_string(std::string_view s) {
  if (s == "human_guesser") return PlayRole::HumanGuesser;
  if (s == "human_spymaster") return PlayRole::HumanSpymaster;
  throw Error(errc::kBadInput, "unknown play role: " + std::string(s));
}

/// A human-vs-scripted game under standard rules (either side clearing its
/// words wins). The human's side is red and moves first; blue is played by
/// the greedy spymaster and the configured guessers.
///
/// In the human_guesser role no payload carries a label before that word is
/// revealed; the full key is only attached once the game is over.
class PlaySession {
 public:
  enum class Phase : std::uint8_t { AwaitingHint, AwaitingGuess, Over };

  PlaySession(std::shared_ptr<const Resources> res, const EnvConfig& config, PlayRole role, std::uint64_t seed)
      : res_(std::move(res)), config_(config), role_(role) {
    if (!res_) throw Error(errc::kInvalidConfig, "play needs embeddings and a wordlist");
    state_ = new_game(res_->wordlist, *res_->store, seed, true);
    state_.opponent_finish_ends_game = true;
    rng_.seed(derive_seed(seed, config_.guesser.seed));
    if (role_ == PlayRole::HumanGuesser) {
      ai_hint();
    } else {
      phase_ = Phase::AwaitingHint;
    }
  }

  PlayRole role() const { return role_; }
  Phase phase() const { return phase_; }
  const GameState& state() const { return state_; }
  const std::optional<Hint>& hint() const { return hint_; }
  int guesses_left() const { return guesses_left_; }
  const std::vector<json>& log() const { return log_; }

  /// human_spymaster: the human's clue is resolved by the configured
  /// guessers, then blue plays its turn.
  json give_hint(const std::string& clue, int count) {
    if (role_ != PlayRole::HumanSpymaster) throw Error(errc::kOutOfPhase, "hints come from the AI spymaster in this role");
    require_phase(Phase::AwaitingHint);
    if (count < 1 || count > kMaxHintCount) throw Error(errc::kIllegalHint, "hint count must be in [1, 9]");
    const std::string c = to_lower(clue);
    if (auto hit = hint_conflict(state_, c)) {
      throw Error(errc::kIllegalHint, "illegal hint '" + c + "': substring match with board word '" + *hit + "'");
    }
    if (c.empty()) throw Error(errc::kIllegalHint, "empty clue");
    if (!res_->store->contains(c)) throw Error(errc::kUnknownWord, "clue not in vocabulary: " + c);
    const std::size_t mark = log_.size();
    const Hint h{c, count};
    emit({{"type", "hint"}, {"team", to_string(state_.acting_team)}, {"clue", h.clue}, {"count", h.count}});
    run_ai_guessers(h);
    if (!state_.game_over) opponent_turn();
    if (phase_ != Phase::Over) phase_ = Phase::AwaitingHint;
    return view(mark);
  }

  /// human_guesser: reveal one board word.
  json guess(const std::string& word) {
    if (role_ != PlayRole::HumanGuesser) throw Error(errc::kOutOfPhase, "guesses are made by the AI in this role");
    require_phase(Phase::AwaitingGuess);
    const auto pos = state_.position_of(word);
    if (!pos) throw Error(errc::kUnknownWord, "not a board word: " + word);
    const std::size_t mark = log_.size();
    const Team team = state_.acting_team;
    const auto out = apply_guess(state_, team, *pos);
    --guesses_left_;
    emit_guess(team, out);
    if (out.game_over) {
      finish();
    } else if (!out.turn_continues || guesses_left_ <= 0) {
      close_human_turn();
    }
    return view(mark);
  }

  json end_turn_now() {
    if (role_ != PlayRole::HumanGuesser) throw Error(errc::kOutOfPhase, "only guessers end their turn");
    require_phase(Phase::AwaitingGuess);
    const std::size_t mark = log_.size();
    close_human_turn();
    return view(mark);
  }

  /// Board plus the events emitted since `since`.
  json view(std::size_t since = 0) const {
    json board = json::array();
    for (std::size_t p = 0; p < kBoardSize; ++p) {
      json card = {{"word", state_.words[p]}, {"revealed", state_.revealed[p]}};
      if (state_.revealed[p] || role_ == PlayRole::HumanSpymaster) card["label"] = to_string(state_.labels[p]);
      board.push_back(std::move(card));
    }
    json v = {{"role", to_string(role_)},
              {"team", to_string(Team::Red)},
              {"board", std::move(board)},
              {"phase", phase_name()},
              {"turn_index", state_.turn_index},
              {"game_over", state_.game_over},
              {"events", json::array()}};
    for (std::size_t i = since; i < log_.size(); ++i) v["events"].push_back(log_[i]);
    if (hint_ && phase_ == Phase::AwaitingGuess) {
      v["hint"] = {{"clue", hint_->clue}, {"count", hint_->count}};
      v["guesses_left"] = guesses_left_;
    }
    if (state_.game_over) {
      if (state_.winner) v["winner"] = to_string(*state_.winner);
      json key = json::array();
      for (auto l : state_.labels) key.push_back(to_string(l));
      v["final_labels"] = std::move(key);
    }
    return v;
  }

 private:
  std::string phase_name() const {
    switch (phase_) {
      case Phase::AwaitingHint: return "awaiting_hint";
      case Phase::AwaitingGuess: return "awaiting_guess";
      case Phase::Over: return "over";
    }
    return "?";
  }

  void require_phase(Phase p) const {
    if (phase_ == Phase::Over) throw Error(errc::kEpisodeOver, "game is over");
    if (phase_ != p) throw Error(errc::kOutOfPhase, "command not valid in phase " + phase_name());
  }

  void emit(json e) { log_.push_back(std::move(e)); }
  void emit_guess(Team team, const GuessOutcome& o) {
    emit({{"type", "guess"}, {"team", to_string(team)}, {"word", o.word}, {"label", to_string(o.label)}});
  }
  void finish() {
    phase_ = Phase::Over;
    hint_.reset();
    json e = {{"type", "game_over"}};
    if (state_.winner) e["winner"] = to_string(*state_.winner);
    emit(std::move(e));
  }

  void run_ai_guessers(const Hint& h) {
    const Team team = state_.acting_team;
    auto turn = simulate_team_turn(state_, h, config_.guesser, *res_->store, rng_);
    state_ = std::move(turn.state);
    for (const auto& o : turn.outcomes) emit_guess(team, o);
    emit({{"type", "turn_end"}, {"team", to_string(team)}});
    if (state_.game_over) finish();
  }

  void opponent_turn() {
    if (state_.remaining(state_.acting_team) == 0) {
      emit({{"type", "turn_end"}, {"team", to_string(state_.acting_team)}});
      end_turn(state_);
      return;
    }
    const Hint h = greedy_policy(state_, *res_->index, config_.search_probes);
    emit({{"type", "hint"}, {"team", to_string(state_.acting_team)}, {"clue", h.clue}, {"count", h.count}});
    run_ai_guessers(h);
  }

  void ai_hint() {
    hint_ = greedy_policy(state_, *res_->index, config_.search_probes);
    guesses_left_ = hint_->count;
    phase_ = Phase::AwaitingGuess;
    emit({{"type", "hint"}, {"team", to_string(state_.acting_team)}, {"clue", hint_->clue}, {"count", hint_->count}});
  }

  void close_human_turn() {
    emit({{"type", "turn_end"}, {"team", to_string(state_.acting_team)}});
    end_turn(state_);
    hint_.reset();
    opponent_turn();
    if (!state_.game_over) ai_hint();
  }

  std::shared_ptr<const Resources> res_;
  EnvConfig config_;
  PlayRole role_;
  GameState state_;
  std::mt19937_64 rng_;
  Phase phase_ = Phase::AwaitingHint;
  std::optional<Hint> hint_;
  int guesses_left_ = 0;
  std::vector<json> log_;
};

}  // namespace codenames_rl
