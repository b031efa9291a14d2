#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "codenames_rl/embedding_store.hpp"
#include "codenames_rl/error.hpp"

namespace codenames_rl {

/// Scoring kernel shared by every search path. Exhaustive IVF search and the
/// brute-force oracle must produce bit-identical scores, so both call this.
inline float inner_product(const float* a, const float* b, std::size_t n) {
  float acc = 0.0f;
#pragma omp simd reduction(+ : acc)
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

struct Neighbor {
  RowId row = 0;
  float score = 0.0f;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Descending score, ties by ascending row id.
inline bool ranks_before(const Neighbor& a, const Neighbor& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.row < b.row;
}

/// Bounded selection of the k best neighbors under `ranks_before`.
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k + 1); }

  void push(RowId row, float score) {
    const Neighbor n{row, score};
    if (heap_.size() < k_) {
      heap_.push_back(n);
      std::push_heap(heap_.begin(), heap_.end(), ranks_before);
    } else if (ranks_before(n, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), ranks_before);
      heap_.back() = n;
      std::push_heap(heap_.begin(), heap_.end(), ranks_before);
    }
  }

  std::vector<Neighbor> take() && {
    std::sort_heap(heap_.begin(), heap_.end(), ranks_before);
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Neighbor> heap_;  // heap front = worst kept neighbor
};

struct SearchParams {
  std::size_t k = 10;
  std::size_t probes = 0;  // 0 selects the index default, ceil(P / 10)
};

inline std::vector<float> to_float_query(std::span<const double> q) {
  return std::vector<float>(q.begin(), q.end());
}

/// Exact top-k by inner product. Scans `rows` (all store rows when empty).
inline std::vector<Neighbor> brute_force_search(const EmbeddingStore& store, std::span<const float> query,
                                                std::size_t k, std::span<const RowId> rows = {}) {
  if (k < 1) throw Error(errc::kBadInput, "k must be >= 1");
  if (query.size() != store.dim()) throw Error(errc::kBadInput, "query dimension mismatch");
  TopK top(k);
  const std::size_t d = store.dim();
  if (rows.empty()) {
    for (RowId r = 0; r < store.size(); ++r) top.push(r, inner_product(store.data() + std::size_t{r} * d, query.data(), d));
  } else {
    for (RowId r : rows) top.push(r, inner_product(store.data() + std::size_t{r} * d, query.data(), d));
  }
  return std::move(top).take();
}

inline std::vector<Neighbor> brute_force_search(const EmbeddingStore& store, std::span<const double> query,
                                                std::size_t k, std::span<const RowId> rows = {}) {
  const auto q = to_float_query(query);
  return brute_force_search(store, std::span<const float>(q), k, rows);
}

/// Inverted-file index: spherical k-means partitions over a set of store
/// rows, exact scoring inside the probed partitions.
class PartitionedIndex {
 public:
  static constexpr std::uint32_t kCacheVersion = 1;
  static constexpr char kCacheMagic[8] = {'C', 'N', 'R', 'L', 'I', 'V', 'F', '1'};
  static constexpr int kLloydIterations = 10;
  static constexpr std::size_t kTrainingRowsPerPartition = 64;

  PartitionedIndex() = default;

  /// Builds over `rows` (every store row when empty). Deterministic in
  /// (store, rows, partitions, seed).
  static PartitionedIndex build(const EmbeddingStore& store, std::size_t partitions, std::uint64_t seed,
                                std::span<const RowId> rows = {}) {
    PartitionedIndex index;
    index.store_ = &store;
    index.dim_ = store.dim();
    if (rows.empty()) {
      index.rows_.resize(store.size());
      std::iota(index.rows_.begin(), index.rows_.end(), RowId{0});
    } else {
      index.rows_.assign(rows.begin(), rows.end());
      std::sort(index.rows_.begin(), index.rows_.end());
      index.rows_.erase(std::unique(index.rows_.begin(), index.rows_.end()), index.rows_.end());
    }
    const std::size_t n = index.rows_.size();
    if (n == 0) throw Error(errc::kBadInput, "cannot index an empty store");
    if (partitions < 1 || partitions > n) {
      throw Error(errc::kBadInput, "partition count " + std::to_string(partitions) + " outside [1, " +
                                       std::to_string(n) + "]");
    }
    index.partitions_count_ = partitions;
    index.train(seed);
    index.assign_all();
    index.pack();
    return index;
  }

  static std::size_t default_partitions(std::size_t n) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))));
  }

  std::size_t partitions() const noexcept { return partitions_count_; }
  std::size_t default_probes() const noexcept { return (partitions_count_ + 9) / 10; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const EmbeddingStore& store() const { return *store_; }
  /// Indexed rows in ascending order.
  std::span<const RowId> rows() const noexcept { return rows_; }
  std::span<const RowId> partition(std::size_t p) const {
    return {packed_rows_.data() + offsets_[p], offsets_[p + 1] - offsets_[p]};
  }
  std::span<const float> centroid(std::size_t p) const { return {centroids_.data() + p * dim_, dim_}; }

  std::vector<Neighbor> search(std::span<const float> query, const SearchParams& params) const {
    if (params.k < 1) throw Error(errc::kBadInput, "k must be >= 1");
    if (query.size() != dim_) throw Error(errc::kBadInput, "query dimension mismatch");
    const std::size_t probes =
        std::clamp<std::size_t>(params.probes == 0 ? default_probes() : params.probes, 1, partitions_count_);
    TopK top(params.k);
    if (probes == partitions_count_) {
      for (std::size_t p = 0; p < partitions_count_; ++p) scan(p, query, top);
      return std::move(top).take();
    }
    TopK best_partitions(probes);
    for (std::size_t p = 0; p < partitions_count_; ++p) {
      best_partitions.push(static_cast<RowId>(p), inner_product(centroids_.data() + p * dim_, query.data(), dim_));
    }
    for (const auto& c : std::move(best_partitions).take()) scan(c.row, query, top);
    return std::move(top).take();
  }

  std::vector<Neighbor> search(std::span<const double> query, const SearchParams& params) const {
    const auto q = to_float_query(query);
    return search(std::span<const float>(q), params);
  }

  /// Little-endian cache: magic, version, D, P, N, centroids (P*D float32),
  /// then per partition a u32 count followed by its u32 row ids.
  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(errc::kMalformedFile, "cannot write index cache: " + path.string());
    out.write(kCacheMagic, sizeof(kCacheMagic));
    write_u32(out, kCacheVersion);
    write_u32(out, static_cast<std::uint32_t>(dim_));
    write_u32(out, static_cast<std::uint32_t>(partitions_count_));
    write_u32(out, static_cast<std::uint32_t>(rows_.size()));
    for (float c : centroids_) write_u32(out, std::bit_cast<std::uint32_t>(c));
    for (std::size_t p = 0; p < partitions_count_; ++p) {
      const auto members = partition(p);
      write_u32(out, static_cast<std::uint32_t>(members.size()));
      for (RowId r : members) write_u32(out, r);
    }
    if (!out) throw Error(errc::kMalformedFile, "failed writing index cache: " + path.string());
  }

  static PartitionedIndex load(const std::filesystem::path& path, const EmbeddingStore& store) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(errc::kMalformedFile, "cannot open index cache: " + path.string());
    char magic[sizeof(kCacheMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCacheMagic, sizeof(magic)) != 0) {
      throw Error(errc::kMalformedFile, "not an index cache: " + path.string());
    }
    if (read_u32(in) != kCacheVersion) throw Error(errc::kMalformedFile, "unsupported index cache version");
    PartitionedIndex index;
    index.store_ = &store;
    index.dim_ = read_u32(in);
    index.partitions_count_ = read_u32(in);
    const std::size_t n = read_u32(in);
    if (index.dim_ != store.dim()) throw Error(errc::kMalformedFile, "index cache dimension does not match store");
    if (index.partitions_count_ == 0 || n == 0 || index.partitions_count_ > n) {
      throw Error(errc::kMalformedFile, "index cache header is inconsistent");
    }
    index.centroids_.resize(index.partitions_count_ * index.dim_);
    for (auto& c : index.centroids_) c = std::bit_cast<float>(read_u32(in));
    index.assignment_.clear();
    for (std::size_t p = 0; p < index.partitions_count_; ++p) {
      const std::size_t count = read_u32(in);
      for (std::size_t i = 0; i < count; ++i) {
        const RowId r = read_u32(in);
        if (r >= store.size()) throw Error(errc::kMalformedFile, "index cache row id outside store");
        index.rows_.push_back(r);
        index.assignment_.push_back(static_cast<std::uint32_t>(p));
      }
    }
    if (!in || index.rows_.size() != n) throw Error(errc::kMalformedFile, "index cache truncated");
    // rows_ must be ascending with assignment_ aligned to it.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return index.rows_[a] < index.rows_[b]; });
    std::vector<RowId> rows(n);
    std::vector<std::uint32_t> assignment(n);
    for (std::size_t i = 0; i < n; ++i) {
      rows[i] = index.rows_[order[i]];
      assignment[i] = index.assignment_[order[i]];
      if (i > 0 && rows[i] == rows[i - 1]) throw Error(errc::kMalformedFile, "index cache repeats a row");
    }
    index.rows_ = std::move(rows);
    index.assignment_ = std::move(assignment);
    index.pack();
    return index;
  }

 private:
  const float* row_ptr(RowId r) const { return store_->data() + std::size_t{r} * dim_; }

  void scan(std::size_t p, std::span<const float> query, TopK& top) const {
    const float* base = packed_.data() + offsets_[p] * dim_;
    for (std::size_t i = offsets_[p]; i < offsets_[p + 1]; ++i, base += dim_) {
      top.push(packed_rows_[i], inner_product(base, query.data(), dim_));
    }
  }

  std::uint32_t nearest_centroid(const float* v, float* best_score = nullptr) const {
    std::uint32_t best = 0;
    float best_s = -std::numeric_limits<float>::infinity();
    for (std::size_t p = 0; p < partitions_count_; ++p) {
      const float s = inner_product(centroids_.data() + p * dim_, v, dim_);
      if (s > best_s) {
        best_s = s;
        best = static_cast<std::uint32_t>(p);
      }
    }
    if (best_score) *best_score = best_s;
    return best;
  }

  // Spherical Lloyd iterations on a seeded sample of at most 64 rows per
  // partition; centroids are kept unit length.
  void train(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<RowId> sample = rows_;
    const std::size_t cap = partitions_count_ * kTrainingRowsPerPartition;
    if (sample.size() > cap) {
      for (std::size_t i = 0; i < cap; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, sample.size() - 1);
        std::swap(sample[i], sample[pick(rng)]);
      }
      sample.resize(cap);
    }
    // Seeded uniform initialization: the first P rows of a shuffled sample.
    for (std::size_t i = 0; i < partitions_count_; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, sample.size() - 1);
      std::swap(sample[i], sample[pick(rng)]);
    }
    centroids_.assign(partitions_count_ * dim_, 0.0f);
    for (std::size_t p = 0; p < partitions_count_; ++p) {
      std::copy_n(row_ptr(sample[p]), dim_, centroids_.begin() + static_cast<std::ptrdiff_t>(p * dim_));
    }

    std::vector<std::uint32_t> assign(sample.size());
    std::vector<float> fit(sample.size());
    std::vector<double> sums(partitions_count_ * dim_);
    std::vector<std::size_t> counts(partitions_count_);
    for (int iter = 0; iter < kLloydIterations; ++iter) {
      for (std::size_t i = 0; i < sample.size(); ++i) assign[i] = nearest_centroid(row_ptr(sample[i]), &fit[i]);
      std::fill(sums.begin(), sums.end(), 0.0);
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < sample.size(); ++i) {
        const float* v = row_ptr(sample[i]);
        double* s = sums.data() + assign[i] * dim_;
        for (std::size_t d = 0; d < dim_; ++d) s[d] += v[d];
        ++counts[assign[i]];
      }
      // Empty clusters restart at the sample rows worst served by their centroid.
      std::vector<std::size_t> by_fit;
      std::size_t next_far = 0;
      for (std::size_t p = 0; p < partitions_count_; ++p) {
        double* s = sums.data() + p * dim_;
        double len = 0.0;
        for (std::size_t d = 0; d < dim_; ++d) len += s[d] * s[d];
        len = std::sqrt(len);
        float* c = centroids_.data() + p * dim_;
        if (counts[p] > 0 && len > 0.0) {
          for (std::size_t d = 0; d < dim_; ++d) c[d] = static_cast<float>(s[d] / len);
          continue;
        }
        if (by_fit.empty()) {
          by_fit.resize(sample.size());
          std::iota(by_fit.begin(), by_fit.end(), std::size_t{0});
          std::stable_sort(by_fit.begin(), by_fit.end(), [&](std::size_t a, std::size_t b) { return fit[a] < fit[b]; });
        }
        std::copy_n(row_ptr(sample[by_fit[next_far % by_fit.size()]]), dim_, c);
        ++next_far;
      }
    }
  }

  void assign_all() {
    assignment_.resize(rows_.size());
    for (std::size_t i = 0; i < rows_.size(); ++i) assignment_[i] = nearest_centroid(row_ptr(rows_[i]));
  }

  // Copies member vectors into partition-contiguous storage.
  void pack() {
    offsets_.assign(partitions_count_ + 1, 0);
    for (auto p : assignment_) ++offsets_[p + 1];
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    packed_rows_.assign(rows_.size(), 0);
    packed_.assign(rows_.size() * dim_, 0.0f);
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < rows_.size(); ++i) {
      const std::size_t slot = cursor[assignment_[i]]++;
      packed_rows_[slot] = rows_[i];
      std::copy_n(row_ptr(rows_[i]), dim_, packed_.begin() + static_cast<std::ptrdiff_t>(slot * dim_));
    }
  }

  static void write_u32(std::ostream& out, std::uint32_t v) {
    const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                           static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    out.write(bytes, 4);
  }
  static std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4] = {};
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw Error(errc::kMalformedFile, "index cache truncated");
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) | (std::uint32_t{b[3]} << 24);
  }

  const EmbeddingStore* store_ = nullptr;
  std::size_t dim_ = 0;
  std::size_t partitions_count_ = 0;
  std::vector<RowId> rows_;
  std::vector<std::uint32_t> assignment_;  // aligned with rows_
  std::vector<float> centroids_;
  std::vector<std::size_t> offsets_;
  std::vector<RowId> packed_rows_;
  std::vector<float> packed_;
};

}  // namespace codenames_rl
