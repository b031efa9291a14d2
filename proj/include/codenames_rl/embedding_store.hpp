#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "codenames_rl/error.hpp"

namespace codenames_rl {

using RowId = std::uint32_t;

inline std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// Inner product of two float vectors, accumulated in double.
inline double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

inline double dot(std::span<const float> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
  return acc;
}

inline double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

/// csm(v, x) = v.x / (|v| |x|); 0 when either side is the zero vector.
inline double cosine(std::span<const float> v, std::span<const double> x) {
  double vv = 0.0;
  for (float f : v) vv += static_cast<double>(f) * static_cast<double>(f);
  const double denom = std::sqrt(vv) * norm(x);
  if (denom == 0.0) return 0.0;
  return std::clamp(dot(v, x) / denom, -1.0, 1.0);
}

/// Vocabulary of lowercase words mapped to unit-normalized vectors.
///
/// Rows keep file order; a word seen twice (after lowercasing) keeps its
/// first vector. Immutable once built, so concurrent readers need no locking.
class EmbeddingStore {
 public:
  EmbeddingStore() = default;

  /// Reads "word v1 ... vD" rows. `limit` caps the number of stored words;
  /// GloVe files are frequency ordered, so a limit keeps the common words.
  static EmbeddingStore load(const std::filesystem::path& path,
                             std::optional<std::size_t> limit = std::nullopt) {
    std::ifstream in(path);
    if (!in) throw Error(errc::kMalformedFile, "cannot open embeddings file: " + path.string());
    EmbeddingStore store;
    std::string line;
    std::size_t line_no = 0;
    std::vector<double> row;
    while (std::getline(in, line)) {
      ++line_no;
      if (limit && store.size() >= *limit) break;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      std::string_view rest(line);
      auto next_field = [&rest]() -> std::string_view {
        const auto b = rest.find_first_not_of(" \t");
        if (b == std::string_view::npos) {
          rest = {};
          return {};
        }
        rest.remove_prefix(b);
        const auto e = std::min(rest.find_first_of(" \t"), rest.size());
        auto field = rest.substr(0, e);
        rest.remove_prefix(e);
        return field;
      };
      const std::string_view token = next_field();
      row.clear();
      for (auto f = next_field(); !f.empty(); f = next_field()) {
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
        if (ec != std::errc{} || ptr != f.data() + f.size()) {
          throw Error(errc::kMalformedFile, "line " + std::to_string(line_no) +
                                                ": cannot parse number '" + std::string(f) + "'");
        }
        row.push_back(value);
      }
      if (row.empty()) {
        throw Error(errc::kMalformedFile, "line " + std::to_string(line_no) + ": no vector components");
      }
      if (store.dim_ == 0) store.dim_ = row.size();
      if (row.size() != store.dim_) {
        throw Error(errc::kMalformedFile, "line " + std::to_string(line_no) + ": dimension " +
                                              std::to_string(row.size()) + " != " +
                                              std::to_string(store.dim_));
      }
      store.push(token, row);
    }
    if (store.size() == 0) throw Error(errc::kMalformedFile, "embeddings file is empty: " + path.string());
    return store;
  }

  /// Same ingest rules as `load`, from in-memory rows.
  static EmbeddingStore from_rows(std::span<const std::string> words,
                                  std::span<const std::vector<double>> vectors) {
    if (words.size() != vectors.size()) throw Error(errc::kBadInput, "words/vectors length mismatch");
    if (words.empty()) throw Error(errc::kBadInput, "empty embedding store");
    EmbeddingStore store;
    store.dim_ = vectors.front().size();
    if (store.dim_ == 0) throw Error(errc::kBadInput, "zero-dimensional vectors");
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (vectors[i].size() != store.dim_) throw Error(errc::kBadInput, "inconsistent dimension at row " + std::to_string(i));
      store.push(words[i], vectors[i]);
    }
    if (store.size() == 0) throw Error(errc::kBadInput, "no admissible rows");
    return store;
  }

  std::size_t size() const noexcept { return words_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<std::string>& vocabulary() const noexcept { return words_; }
  const std::string& word(RowId r) const { return words_.at(r); }

  std::optional<RowId> find(std::string_view w) const {
    auto it = index_.find(to_lower(w));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(std::string_view w) const { return find(w).has_value(); }
  RowId row(std::string_view w) const {
    if (auto r = find(w)) return *r;
    throw Error(errc::kUnknownWord, "word not in vocabulary: " + std::string(w));
  }

  std::span<const float> vector(RowId r) const {
    return {vectors_.data() + static_cast<std::size_t>(r) * dim_, dim_};
  }
  std::span<const float> vector(std::string_view w) const { return vector(row(w)); }
  const float* data() const noexcept { return vectors_.data(); }

  double cosine_similarity(RowId a, RowId b) const {
    if (a > b) std::swap(a, b);  // identical arithmetic order either way round
    return std::clamp(dot(vector(a), vector(b)) / (norms_[a] * norms_[b]), -1.0, 1.0);
  }
  double cosine_similarity(std::string_view a, std::string_view b) const {
    return cosine_similarity(row(a), row(b));
  }

  /// Weighted component-wise mean of stored vectors; not re-normalized.
  std::vector<double> mean_vector(std::span<const RowId> rows, std::span<const double> weights = {}) const {
    if (rows.empty()) throw Error(errc::kBadInput, "mean_vector of an empty word list");
    if (!weights.empty() && weights.size() != rows.size()) {
      throw Error(errc::kBadInput, "mean_vector weights length mismatch");
    }
    std::vector<double> mean(dim_, 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double w = weights.empty() ? 1.0 : weights[i];
      const auto v = vector(rows[i]);
      for (std::size_t d = 0; d < dim_; ++d) mean[d] += w * static_cast<double>(v[d]);
    }
    const double n = static_cast<double>(rows.size());
    for (auto& x : mean) x /= n;
    return mean;
  }
  std::vector<double> mean_vector(std::span<const std::string> words, std::span<const double> weights = {}) const {
    std::vector<RowId> rows;
    rows.reserve(words.size());
    for (const auto& w : words) rows.push_back(row(w));
    return mean_vector(rows, weights);
  }

 private:
  void push(std::string_view token, std::span<const double> values) {
    std::string w = to_lower(token);
    if (index_.contains(w)) return;
    double sq = 0.0;
    for (double x : values) sq += x * x;
    const double n = std::sqrt(sq);
    if (n == 0.0 || !std::isfinite(n)) return;
    const auto r = static_cast<RowId>(words_.size());
    double stored = 0.0;
    for (double x : values) {
      vectors_.push_back(static_cast<float>(x / n));
      stored += static_cast<double>(vectors_.back()) * vectors_.back();
    }
    norms_.push_back(std::sqrt(stored));
    index_.emplace(w, r);
    words_.push_back(std::move(w));
  }

  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::vector<float> vectors_;
  std::vector<double> norms_;  // norms of the stored float rows: 1 up to rounding
  std::unordered_map<std::string, RowId> index_;
};

/// One word per line; blank lines and '#' comments ignored; lowercased.
inline std::vector<std::string> load_wordlist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::kMalformedFile, "cannot open wordlist: " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    std::string w = to_lower(std::string_view(line).substr(b, e - b + 1));
    if (std::find(words.begin(), words.end(), w) == words.end()) words.push_back(std::move(w));
  }
  return words;
}

}  // namespace codenames_rl
