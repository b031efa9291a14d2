#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "codenames_rl/ann_index.hpp"
#include "codenames_rl/error.hpp"
#include "codenames_rl/game.hpp"
#include "codenames_rl/scoring.hpp"

namespace codenames_rl {

/// One-word-at-a-time spymaster: for each unrevealed own word, the top legal
/// g_mean clue; the best of those wins (earlier board position on ties).
/// Acts for `state.acting_team`.
inline Hint greedy_policy(const GameState& state, const PartitionedIndex& index, std::size_t probes = 0) {
  if (state.game_over) throw Error(errc::kEpisodeOver, "game is already over");
  const auto own = state.unrevealed_of(state.acting_team, NormalizedLabel::Mine);
  if (own.empty()) throw Error(errc::kBarrenTargetSet, "acting team has no unrevealed words");
  ScoringParams params;
  params.strategy = Strategy::Mean;
  params.kappa = 1;
  params.probes = probes;
  std::optional<Candidate> best;
  for (std::size_t pos : own) {
    const std::size_t one[] = {pos};
    try {
      const auto c = generate_candidates(make_target_set(state, one, state.acting_team), state, params, index);
      if (!best || c.front().score > best->score) best = c.front();
    } catch (const Error& e) {
      if (e.code() != errc::kBarrenTargetSet) throw;
    }
  }
  if (!best) {
    const RowId first[] = {state.rows[own.front()]};
    best = nearest_legal_word(state, index.store().mean_vector(first), index);
    if (!best) throw Error(errc::kBarrenTargetSet, "no legal clue exists for this board");
  }
  return {best->word, 1};
}

/// Uniform [0,1] action components from a seeded stream.
class RandomPolicy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}

  std::vector<double> operator()(std::size_t action_size) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> a(action_size);
    for (auto& x : a) x = unit(rng_);
    return a;
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace codenames_rl
