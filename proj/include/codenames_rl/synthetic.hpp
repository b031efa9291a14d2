#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "codenames_rl/embedding_store.hpp"
#include "codenames_rl/error.hpp"

namespace codenames_rl {

/// Topic-structured random embeddings for running everything without a
/// downloaded embedding file. Every deck word mixes two topics; filler words
/// (pronounceable made-up tokens) mix one or two, so each deck word has
/// nearby clue candidates while unrelated words stay near orthogonal.
struct SyntheticSpec {
  std::size_t dim = 64;
  std::size_t topics = 48;
  std::size_t filler_words = 5000;
  double secondary_weight = 0.5;
  double noise = 0.35;  // per-vector noise norm relative to a unit topic direction
  std::uint64_t seed = 1;
};

struct SyntheticEmbeddings {
  std::vector<std::string> words;
  std::vector<std::vector<double>> vectors;

  EmbeddingStore store() const { return EmbeddingStore::from_rows(words, vectors); }

  void write_text(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw Error(errc::kMalformedFile, "cannot write embeddings: " + path.string());
    out.precision(9);
    for (std::size_t i = 0; i < words.size(); ++i) {
      out << words[i];
      for (double x : vectors[i]) out << ' ' << x;
      out << '\n';
    }
  }
};

inline std::vector<double> random_unit(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  double n = 0.0;
  do {
    n = 0.0;
    for (auto& x : v) {
      x = g(rng);
      n += x * x;
    }
  } while (n == 0.0);
  n = std::sqrt(n);
  for (auto& x : v) x /= n;
  return v;
}

/// Filler tokens are emitted first (so a frequency-style prefix limit keeps
/// them as clue candidates), followed by the deck words.
inline SyntheticEmbeddings make_synthetic_embeddings(std::span<const std::string> deck, const SyntheticSpec& spec) {
  if (spec.dim < 2 || spec.topics < 2) throw Error(errc::kBadInput, "synthetic spec needs dim >= 2 and topics >= 2");
  std::mt19937_64 rng(spec.seed);
  std::vector<std::vector<double>> topics;
  for (std::size_t t = 0; t < spec.topics; ++t) topics.push_back(random_unit(spec.dim, rng));
  std::uniform_int_distribution<std::size_t> topic(0, spec.topics - 1);
  std::bernoulli_distribution two_topics(0.5);

  auto mix = [&](std::size_t a, std::optional<std::size_t> b) {
    const auto noise = random_unit(spec.dim, rng);
    std::vector<double> v(spec.dim);
    for (std::size_t d = 0; d < spec.dim; ++d) {
      v[d] = topics[a][d] + spec.noise * noise[d];
      if (b) v[d] += spec.secondary_weight * topics[*b][d];
    }
    return v;
  };

  SyntheticEmbeddings out;
  std::unordered_set<std::string> taken(deck.begin(), deck.end());
  static constexpr std::string_view kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "gl", "tr"};
  static constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
  std::uniform_int_distribution<std::size_t> onset(0, std::size(kOnsets) - 1);
  std::uniform_int_distribution<std::size_t> vowel(0, std::size(kVowels) - 1);
  while (out.words.size() < spec.filler_words) {
    std::string w;
    for (int s = 0; s < 3; ++s) {
      w += kOnsets[onset(rng)];
      w += kVowels[vowel(rng)];
    }
    w += kOnsets[onset(rng)];
    if (!taken.insert(w).second) continue;
    const std::size_t a = topic(rng);
    std::optional<std::size_t> b;
    if (two_topics(rng)) b = topic(rng);
    out.words.push_back(std::move(w));
    out.vectors.push_back(mix(a, b));
  }
  for (const auto& w : deck) {
    const std::size_t a = topic(rng);
    std::size_t b = topic(rng);
    if (b == a) b = (a + 1) % spec.topics;
    out.words.push_back(to_lower(w));
    out.vectors.push_back(mix(a, b));
  }
  return out;
}

/// N random unit vectors grouped around `clusters` centers (a rough stand-in
/// for the cluster structure of real word embeddings), named w0, w1, ...
inline SyntheticEmbeddings make_clustered_vectors(std::size_t n, std::size_t dim, std::size_t clusters,
                                                  double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> centers;
  for (std::size_t c = 0; c < clusters; ++c) centers.push_back(random_unit(dim, rng));
  std::uniform_int_distribution<std::size_t> pick(0, clusters - 1);
  SyntheticEmbeddings out;
  out.words.reserve(n);
  out.vectors.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = centers[pick(rng)];
    auto v = random_unit(dim, rng);
    for (std::size_t d = 0; d < dim; ++d) v[d] = c[d] + spread * v[d];
    out.words.push_back("w" + std::to_string(i));
    out.vectors.push_back(std::move(v));
  }
  return out;
}

}  // namespace codenames_rl
