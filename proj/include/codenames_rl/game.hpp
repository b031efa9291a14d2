#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "codenames_rl/embedding_store.hpp"
#include "codenames_rl/error.hpp"

namespace codenames_rl {

inline constexpr std::size_t kBoardSize = 25;
inline constexpr int kFirstTeamWords = 9;
inline constexpr int kSecondTeamWords = 8;
inline constexpr int kBystanders = 7;
inline constexpr int kMaxHintCount = 9;

inline constexpr double kWinReward = 0.0;
inline constexpr double kTurnReward = -1.0;
inline constexpr double kAssassinReward = -25.0;

enum class Team : std::uint8_t { Red, Blue };
enum class Label : std::uint8_t { Red, Blue, Bystander, Assassin };
enum class NormalizedLabel : std::uint8_t { Mine, Opposing, Bystander, Assassin };

constexpr Team other(Team t) { return t == Team::Red ? Team::Blue : Team::Red; }
constexpr Label team_label(Team t) { return t == Team::Red ? Label::Red : Label::Blue; }

constexpr NormalizedLabel normalize(Label l, Team perspective) {
  switch (l) {
    case Label::Red:
      return perspective == Team::Red ? NormalizedLabel::Mine : NormalizedLabel::Opposing;
    case Label::Blue:
      return perspective == Team::Blue ? NormalizedLabel::Mine : NormalizedLabel::Opposing;
    case Label::Bystander:
      return NormalizedLabel::Bystander;
    case Label::Assassin:
      return NormalizedLabel::Assassin;
  }
  return NormalizedLabel::Bystander;
}

constexpr std::string_view to_string(Team t) { return t == Team::Red ? "red" : "blue"; }
constexpr std::string_view to_string(Label l) {
  switch (l) {
    case Label::Red: return "red";
    case Label::Blue: return "blue";
    case Label::Bystander: return "bystander";
    case Label::Assassin: return "assassin";
  }
  return "?";
}
constexpr std::string_view to_string(NormalizedLabel l) {
  switch (l) {
    case NormalizedLabel::Mine: return "mine";
    case NormalizedLabel::Opposing: return "opposing";
    case NormalizedLabel::Bystander: return "bystander";
    case NormalizedLabel::Assassin: return "assassin";
  }
  return "?";
}

struct Hint {
  std::string clue;
  int count = 1;
};

struct GuessOutcome {
  std::size_t position = 0;
  std::string word;
  Label label = Label::Bystander;
  bool turn_continues = false;
  bool game_over = false;
  std::optional<Team> winner;
};

/// The board, its hidden labels, and the reveal mask. A plain value: copy it
/// to branch or to keep the previous state around for reward computation.
struct GameState {
  std::array<std::string, kBoardSize> words;
  std::array<RowId, kBoardSize> rows{};
  std::array<Label, kBoardSize> labels{};
  std::array<bool, kBoardSize> revealed{};
  Team first_team = Team::Red;
  Team agent_team = Team::Red;
  Team acting_team = Team::Red;
  int turn_index = 0;
  bool game_over = false;
  std::optional<Team> winner;
  std::optional<Team> assassin_revealed_by;
  std::array<bool, 2> finished{};  // indexed by Team
  // Standard rules end the game when either side clears its words. The RL
  // environment keeps playing until the agent's side clears or the assassin
  // is revealed.
  bool opponent_finish_ends_game = false;

  NormalizedLabel normalized(std::size_t pos, Team perspective) const { return normalize(labels[pos], perspective); }

  int remaining(Team t) const {
    int n = 0;
    for (std::size_t i = 0; i < kBoardSize; ++i) n += (!revealed[i] && labels[i] == team_label(t)) ? 1 : 0;
    return n;
  }
  int revealed_count() const { return static_cast<int>(std::count(revealed.begin(), revealed.end(), true)); }

  std::optional<std::size_t> position_of(std::string_view word) const {
    const std::string w = to_lower(word);
    for (std::size_t i = 0; i < kBoardSize; ++i)
      if (words[i] == w) return i;
    return std::nullopt;
  }

  std::vector<std::size_t> unrevealed_of(Team perspective, NormalizedLabel which) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < kBoardSize; ++i)
      if (!revealed[i] && normalized(i, perspective) == which) out.push_back(i);
    return out;
  }

  bool operator==(const GameState&) const = default;
};

/// Deals 25 distinct words and the 9/8/7/1 labels. The first-moving team
/// (red) holds nine words; `agent_team_first` puts the agent on that team.
inline GameState new_game(std::span<const std::string> wordlist, const EmbeddingStore& store, std::uint64_t seed,
                          bool agent_team_first = true) {
  if (wordlist.size() < kBoardSize) {
    throw Error(errc::kBadInput, "wordlist has " + std::to_string(wordlist.size()) + " words, need at least 25");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pick(wordlist.size());
  std::iota(pick.begin(), pick.end(), std::size_t{0});
  for (std::size_t i = 0; i < kBoardSize; ++i) {
    std::uniform_int_distribution<std::size_t> d(i, pick.size() - 1);
    std::swap(pick[i], pick[d(rng)]);
  }
  std::array<Label, kBoardSize> labels{};
  std::size_t k = 0;
  for (int i = 0; i < kFirstTeamWords; ++i) labels[k++] = Label::Red;
  for (int i = 0; i < kSecondTeamWords; ++i) labels[k++] = Label::Blue;
  for (int i = 0; i < kBystanders; ++i) labels[k++] = Label::Bystander;
  labels[k++] = Label::Assassin;
  for (std::size_t i = kBoardSize - 1; i > 0; --i) {
    std::uniform_int_distribution<std::size_t> d(0, i);
    std::swap(labels[i], labels[d(rng)]);
  }

  GameState s;
  for (std::size_t i = 0; i < kBoardSize; ++i) {
    s.words[i] = to_lower(wordlist[pick[i]]);
    const auto row = store.find(s.words[i]);
    if (!row) throw Error(errc::kUnknownWord, "board word not in embedding vocabulary: " + s.words[i]);
    s.rows[i] = *row;
  }
  for (std::size_t i = 0; i < kBoardSize; ++i) {
    for (std::size_t j = 0; j < i; ++j)
      if (s.words[i] == s.words[j]) throw Error(errc::kBadInput, "duplicate board word: " + s.words[i]);
  }
  s.labels = labels;
  s.first_team = Team::Red;
  s.agent_team = agent_team_first ? Team::Red : Team::Blue;
  s.acting_team = s.first_team;
  return s;
}

/// The board word the clue collides with (equal, substring or superstring).
inline std::optional<std::string> hint_conflict(const GameState& state, std::string_view clue) {
  const std::string c = to_lower(clue);
  for (const auto& w : state.words) {
    if (c.find(w) != std::string::npos || w.find(c) != std::string::npos) return w;
  }
  return std::nullopt;
}

inline bool legal_hint(const GameState& state, std::string_view clue) {
  if (clue.empty()) return false;
  return !hint_conflict(state, clue).has_value();
}

/// Reveals `pos` for `team` and resolves its consequences.
inline GuessOutcome apply_guess(GameState& state, Team team, std::size_t pos) {
  if (state.game_over) throw Error(errc::kEpisodeOver, "game is already over");
  if (pos >= kBoardSize) throw Error(errc::kBadInput, "board position out of range");
  if (state.revealed[pos]) throw Error(errc::kAlreadyRevealed, "word already revealed: " + state.words[pos]);

  state.revealed[pos] = true;
  GuessOutcome out;
  out.position = pos;
  out.word = state.words[pos];
  out.label = state.labels[pos];

  if (out.label == Label::Assassin) {
    state.game_over = true;
    state.assassin_revealed_by = team;
    state.winner = other(team);
  } else if (out.label == Label::Red || out.label == Label::Blue) {
    const Team owner = out.label == Label::Red ? Team::Red : Team::Blue;
    if (state.remaining(owner) == 0) {
      state.finished[static_cast<std::size_t>(owner)] = true;
      if (owner == state.agent_team || state.opponent_finish_ends_game) {
        state.game_over = true;
        state.winner = owner;
      }
    }
  }
  out.game_over = state.game_over;
  out.winner = state.winner;
  out.turn_continues = !state.game_over && normalize(out.label, team) == NormalizedLabel::Mine;
  return out;
}

/// Passes play to the other team.
inline void end_turn(GameState& state) {
  ++state.turn_index;
  if (!state.game_over) state.acting_team = other(state.acting_team);
}

/// 0 when the agent's team won during the transition, -25 when the agent's
/// guessers revealed the assassin, -1 otherwise.
inline double reward(const GameState& prev, const GameState& next, Team agent_team) {
  if (!prev.game_over && next.game_over) {
    if (next.winner == agent_team) return kWinReward;
    if (next.assassin_revealed_by == agent_team) return kAssassinReward;
  }
  return kTurnReward;
}

}  // namespace codenames_rl
