#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codenames_rl/ann_index.hpp"
#include "codenames_rl/embedding_store.hpp"
#include "codenames_rl/error.hpp"
#include "codenames_rl/game.hpp"

namespace codenames_rl {

enum class Strategy : std::uint8_t { Mean, Minimax, JaraWeighted, KimEnergy };

inline constexpr std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Mean: return "mean";
    case Strategy::Minimax: return "minimax";
    case Strategy::JaraWeighted: return "jara";
    case Strategy::KimEnergy: return "kim";
  }
  return "?";
}

inline Strategy strategy_from_string(std::string_view s) {
  for (auto v : {Strategy::Mean, Strategy::Minimax, Strategy::JaraWeighted, Strategy::KimEnergy})
    if (to_string(v) == s) return v;
  throw Error(errc::kInvalidConfig, "unknown strategy: " + std::string(s));
}

/// k(u): weight applied to each unintended word in the weighted mean.
struct BadWordWeights {
  double bystander = -1.0;
  double opposing = -2.0;
  double assassin = -3.0;

  double operator()(NormalizedLabel l) const {
    switch (l) {
      case NormalizedLabel::Bystander: return bystander;
      case NormalizedLabel::Opposing: return opposing;
      case NormalizedLabel::Assassin: return assassin;
      case NormalizedLabel::Mine: break;
    }
    return 0.0;
  }
};

struct BadWord {
  RowId row;
  NormalizedLabel label;
};

struct ScoringParams {
  Strategy strategy = Strategy::Mean;
  double lambda_t = 0.3;
  BadWordWeights weights;
  std::size_t kappa = 10;
  std::size_t probes = 0;  // ANN probes, 0 = index default
};

inline constexpr double kInvalidEnergy = std::numeric_limits<double>::infinity();

// g_mean: cosine between the clue and the unweighted target mean.
inline double score_mean(const EmbeddingStore& store, RowId clue, std::span<const RowId> targets) {
  return cosine(store.vector(clue), store.mean_vector(targets));
}

// g_minimax: worst target similarity, zeroed unless it clears lambda_t.
inline double score_minimax(const EmbeddingStore& store, RowId clue, std::span<const RowId> targets, double lambda_t) {
  if (targets.empty()) throw Error(errc::kBadInput, "empty target set");
  double worst = std::numeric_limits<double>::infinity();
  for (RowId t : targets) worst = std::min(worst, store.cosine_similarity(clue, t));
  return worst > lambda_t ? worst : 0.0;
}

// g_Jara: cosine to (sum targets + sum k(u) u) / (|I| + |U|).
inline double score_jara(const EmbeddingStore& store, RowId clue, std::span<const RowId> targets,
                         std::span<const BadWord> bad, const BadWordWeights& weights) {
  if (targets.empty()) throw Error(errc::kBadInput, "empty target set");
  std::vector<RowId> rows(targets.begin(), targets.end());
  std::vector<double> w(targets.size(), 1.0);
  for (const auto& b : bad) {
    rows.push_back(b.row);
    w.push_back(weights(b.label));
  }
  return cosine(store.vector(clue), store.mean_vector(rows, w));
}

// f_Kim: farthest target distance when it beats both the nearest bad word and
// lambda_t, else +inf.
inline double energy_kim(const EmbeddingStore& store, RowId clue, std::span<const RowId> targets,
                         std::span<const BadWord> bad, double lambda_t) {
  if (targets.empty()) throw Error(errc::kBadInput, "empty target set");
  double far_target = -std::numeric_limits<double>::infinity();
  for (RowId t : targets) far_target = std::max(far_target, 1.0 - store.cosine_similarity(clue, t));
  double near_bad = std::numeric_limits<double>::infinity();
  for (const auto& b : bad) near_bad = std::min(near_bad, 1.0 - store.cosine_similarity(clue, b.row));
  return (far_target < near_bad && far_target < lambda_t) ? far_target : kInvalidEnergy;
}

/// Unrevealed words that are not the perspective team's own.
inline std::vector<BadWord> unrevealed_bad_words(const GameState& state, Team perspective) {
  std::vector<BadWord> bad;
  for (std::size_t p = 0; p < kBoardSize; ++p) {
    if (state.revealed[p]) continue;
    const auto l = state.normalized(p, perspective);
    if (l != NormalizedLabel::Mine) bad.push_back({state.rows[p], l});
  }
  return bad;
}

inline double strategy_score(const EmbeddingStore& store, RowId clue, std::span<const RowId> targets,
                             std::span<const BadWord> bad, const ScoringParams& params) {
  switch (params.strategy) {
    case Strategy::Mean: return score_mean(store, clue, targets);
    case Strategy::Minimax: return score_minimax(store, clue, targets, params.lambda_t);
    case Strategy::JaraWeighted: return score_jara(store, clue, targets, bad, params.weights);
    case Strategy::KimEnergy: return energy_kim(store, clue, targets, bad, params.lambda_t);
  }
  return 0.0;
}

struct Candidate {
  RowId row;
  std::string word;
  double score;
};

/// Board positions targeted by a hint, plus their store rows.
struct TargetSet {
  std::vector<std::size_t> positions;
  std::vector<RowId> rows;

  std::size_t size() const { return positions.size(); }
};

/// Validates that every position is an unrevealed word of `team`.
inline TargetSet make_target_set(const GameState& state, std::span<const std::size_t> positions, Team team) {
  if (positions.empty() || positions.size() > static_cast<std::size_t>(kMaxHintCount)) {
    throw Error(errc::kBadInput, "target set size must be in [1, 9]");
  }
  TargetSet t;
  for (std::size_t p : positions) {
    if (p >= kBoardSize || state.revealed[p] || state.normalized(p, team) != NormalizedLabel::Mine) {
      throw Error(errc::kBadInput, "target position " + std::to_string(p) + " is not an unrevealed own word");
    }
    t.positions.push_back(p);
    t.rows.push_back(state.rows[p]);
  }
  return t;
}

/// Nearest index word to `query` that is a legal clue on this board,
/// searching exhaustively.
inline std::optional<Candidate> nearest_legal_word(const GameState& state, std::span<const double> query,
                                                   const PartitionedIndex& index) {
  const auto& store = index.store();
  const auto q = to_float_query(query);
  std::size_t k = 64;
  std::size_t seen = 0;
  while (true) {
    k = std::min(k, index.size());
    const auto hits = index.search(std::span<const float>(q), {k, index.partitions()});
    for (std::size_t i = seen; i < hits.size(); ++i) {
      const auto& w = store.word(hits[i].row);
      if (legal_hint(state, w)) return Candidate{hits[i].row, w, static_cast<double>(hits[i].score)};
    }
    if (k >= index.size()) return std::nullopt;
    seen = hits.size();
    k *= 2;
  }
}

/// Up to kappa legal clue words for the targets, best first under the
/// strategy (ascending finite energy for KimEnergy). Retrieval always uses
/// the unweighted target mean; ties keep retrieval order.
inline std::vector<Candidate> generate_candidates(const TargetSet& targets, const GameState& state,
                                                  const ScoringParams& params, const PartitionedIndex& index) {
  if (targets.size() == 0) throw Error(errc::kBadInput, "empty target set");
  if (params.kappa < 1) throw Error(errc::kInvalidConfig, "kappa must be >= 1");
  const auto& store = index.store();
  const auto query = to_float_query(store.mean_vector(targets.rows));
  const Team team = state.acting_team;
  const auto bad = unrevealed_bad_words(state, team);
  const bool ascending = params.strategy == Strategy::KimEnergy;

  std::vector<Candidate> kept;
  auto collect = [&](const std::vector<Neighbor>& hits, std::size_t from) {
    for (std::size_t i = from; i < hits.size(); ++i) {
      const auto& w = store.word(hits[i].row);
      if (!legal_hint(state, w)) continue;
      const double s = strategy_score(store, hits[i].row, targets.rows, bad, params);
      if (ascending && s == kInvalidEnergy) continue;
      kept.push_back({hits[i].row, w, s});
    }
  };

  std::size_t k = std::min(4 * params.kappa, index.size());
  collect(index.search(std::span<const float>(query), {k, params.probes}), 0);
  if (kept.size() < params.kappa && k < index.size()) {
    kept.clear();
    std::size_t seen = 0;
    while (true) {
      const auto hits = index.search(std::span<const float>(query), {k, index.partitions()});
      collect(hits, seen);
      if (kept.size() >= params.kappa || k >= index.size()) break;
      seen = hits.size();
      k = std::min(2 * k, index.size());
    }
  }
  if (kept.empty()) throw Error(errc::kBarrenTargetSet, "no legal clue candidate for the target set");
  std::stable_sort(kept.begin(), kept.end(), [ascending](const Candidate& a, const Candidate& b) {
    return ascending ? a.score < b.score : a.score > b.score;
  });
  if (kept.size() > params.kappa) kept.resize(params.kappa);
  return kept;
}

}  // namespace codenames_rl
