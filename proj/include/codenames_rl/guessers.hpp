#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "codenames_rl/embedding_store.hpp"
#include "codenames_rl/error.hpp"
#include "codenames_rl/game.hpp"

namespace codenames_rl {

enum class GuesserMode : std::uint8_t { Greedy, Stochastic };

struct GuesserParams {
  GuesserMode mode = GuesserMode::Greedy;
  double lambda = 0.0;  // similarity floor: only words with s(c, w) > lambda are guessed
  double tau = 0.05;    // softmax temperature for the stochastic mode
  std::uint64_t seed = 0;
};

inline void validate(const GuesserParams& p) {
  if (!(p.tau > 0.0)) throw Error(errc::kInvalidConfig, "guesser tau must be > 0");
  if (p.lambda < -1.0 || p.lambda > 1.0) throw Error(errc::kInvalidConfig, "guesser lambda must lie in [-1, 1]");
}

struct ScoredPosition {
  std::size_t position;
  double similarity;
};

/// Unrevealed board positions with s(clue, w) > lambda, in board order.
inline std::vector<ScoredPosition> guess_pool(const GameState& state, const EmbeddingStore& store, RowId clue,
                                              double lambda) {
  std::vector<ScoredPosition> pool;
  for (std::size_t p = 0; p < kBoardSize; ++p) {
    if (state.revealed[p]) continue;
    const double s = store.cosine_similarity(clue, state.rows[p]);
    if (s > lambda) pool.push_back({p, s});
  }
  return pool;
}

inline std::vector<std::size_t> greedy_guess_order(const GameState& state, const Hint& hint, const GuesserParams& params,
                                                   const EmbeddingStore& store) {
  auto pool = guess_pool(state, store, store.row(hint.clue), params.lambda);
  std::stable_sort(pool.begin(), pool.end(),
                   [](const ScoredPosition& a, const ScoredPosition& b) { return a.similarity > b.similarity; });
  std::vector<std::size_t> order;
  const auto n = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(std::max(hint.count, 0)));
  for (std::size_t i = 0; i < n; ++i) order.push_back(pool[i].position);
  return order;
}

/// softmax(s / tau), max-shifted before exponentiation.
inline std::vector<double> softmax_probabilities(std::span<const double> similarities, double tau) {
  std::vector<double> p(similarities.size());
  if (p.empty()) return p;
  const double top = *std::max_element(similarities.begin(), similarities.end());
  double z = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp((similarities[i] - top) / tau);
    z += p[i];
  }
  for (auto& x : p) x /= z;
  return p;
}

/// Draws up to n words without replacement, each draw from the softmax over
/// the words still in the pool.
inline std::vector<std::size_t> stochastic_guess_order(const GameState& state, const Hint& hint,
                                                       const GuesserParams& params, const EmbeddingStore& store,
                                                       std::mt19937_64& rng) {
  auto pool = guess_pool(state, store, store.row(hint.clue), params.lambda);
  std::vector<std::size_t> order;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> sims;
  while (!pool.empty() && order.size() < static_cast<std::size_t>(std::max(hint.count, 0))) {
    sims.clear();
    for (const auto& c : pool) sims.push_back(c.similarity);
    const auto probs = softmax_probabilities(sims, params.tau);
    const double u = unit(rng);
    std::size_t chosen = pool.size() - 1;
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cumulative += probs[i];
      if (u < cumulative) {
        chosen = i;
        break;
      }
    }
    order.push_back(pool[chosen].position);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(chosen));
  }
  return order;
}

inline std::vector<std::size_t> guess_order(const GameState& state, const Hint& hint, const GuesserParams& params,
                                            const EmbeddingStore& store, std::mt19937_64& rng) {
  return params.mode == GuesserMode::Greedy ? greedy_guess_order(state, hint, params, store)
                                            : stochastic_guess_order(state, hint, params, store, rng);
}

struct TeamTurn {
  GameState state;
  Team team = Team::Red;
  std::vector<GuessOutcome> outcomes;
};

/// Plays one full turn for the acting team: guesses in order until a
/// non-own reveal, the game ends, or n guesses have been made; then passes.
/// The count is capped at the team's unrevealed word count.
inline TeamTurn simulate_team_turn(const GameState& state, const Hint& hint, const GuesserParams& params,
                                   const EmbeddingStore& store, std::mt19937_64& rng) {
  if (state.game_over) throw Error(errc::kEpisodeOver, "game is already over");
  if (hint.count < 1 || hint.count > kMaxHintCount) throw Error(errc::kIllegalHint, "hint count must be in [1, 9]");
  if (auto hit = hint_conflict(state, hint.clue); hit || hint.clue.empty()) {
    throw Error(errc::kIllegalHint, "clue '" + hint.clue + "' overlaps board word '" + hit.value_or("") + "'");
  }
  TeamTurn turn{state, state.acting_team, {}};
  Hint capped = hint;
  capped.count = std::min(hint.count, std::max(state.remaining(turn.team), 1));
  for (std::size_t pos : guess_order(state, capped, params, store, rng)) {
    turn.outcomes.push_back(apply_guess(turn.state, turn.team, pos));
    if (!turn.outcomes.back().turn_continues) break;
  }
  end_turn(turn.state);
  return turn;
}

}  // namespace codenames_rl
