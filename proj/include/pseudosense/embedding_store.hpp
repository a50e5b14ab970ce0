#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace pseudosense {

/// One sense of one word.
///
/// `sense_id` is the dense per-word index (0..n_w-1) used for matrix
/// construction; `original_id` is the id found in the source file and is what
/// reports display.
struct SenseVector {
  std::string word;
  std::size_t sense_id = 0;
  std::int64_t original_id = 0;
  Eigen::VectorXd vector;
  std::optional<Eigen::VectorXd> cluster_center;

  friend bool operator==(const SenseVector& a, const SenseVector& b);
};

enum class EmbeddingFormat { canonical, mssg };

EmbeddingFormat parse_embedding_format(std::string_view name);

class EmbeddingStoreBuilder;

/// Immutable multi-sense embedding table.
///
/// Senses are stored contiguously, grouped by word in first-appearance order
/// and, within a word, in ascending original-id order.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension = 0) : dimension_(dimension) {}

  std::size_t dimension() const noexcept { return dimension_; }
  /// Total number of sense vectors.
  std::size_t size() const noexcept { return senses_.size(); }
  bool empty() const noexcept { return senses_.empty(); }

  const std::vector<std::string>& words() const noexcept { return words_; }
  bool contains(std::string_view word) const;
  std::size_t num_senses(std::string_view word) const;

  std::span<const SenseVector> senses() const noexcept { return senses_; }
  std::span<const SenseVector> senses_of(std::string_view word) const;

  /// Lookup by dense sense id.
  const SenseVector& sense(std::string_view word, std::size_t sense_id) const;
  /// Lookup by the id the source file used.
  const SenseVector& sense_by_original(std::string_view word, std::int64_t original_id) const;

  /// Word-level global vector (MSSG files carry one per word), if any.
  const Eigen::VectorXd* global_vector(std::string_view word) const;
  bool has_global_vectors() const noexcept { return !globals_.empty(); }
  bool has_cluster_centers() const noexcept;

  /// Copy of this store with every sense vector replaced by `fn(vector)`.
  /// Cluster centers and global vectors are copied unchanged.
  EmbeddingStore map_vectors(
      const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn) const;

  friend bool operator==(const EmbeddingStore& a, const EmbeddingStore& b);

 private:
  friend class EmbeddingStoreBuilder;

  struct Range {
    std::size_t offset;
    std::size_t count;
  };

  const Range& range_of(std::string_view word) const;

  std::size_t dimension_;
  std::vector<SenseVector> senses_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, Range> index_;
  std::unordered_map<std::string, Eigen::VectorXd> globals_;
};

/// Accumulates raw senses, then validates and normalizes them into a store.
class EmbeddingStoreBuilder {
 public:
  explicit EmbeddingStoreBuilder(std::size_t dimension);

  EmbeddingStoreBuilder& add_sense(std::string word, std::int64_t original_id,
                                   Eigen::VectorXd vector,
                                   std::optional<Eigen::VectorXd> cluster_center = std::nullopt);
  EmbeddingStoreBuilder& set_cluster_center(std::string_view word, std::int64_t original_id,
                                            Eigen::VectorXd center);
  EmbeddingStoreBuilder& set_global_vector(std::string word, Eigen::VectorXd vector);

  /// Throws InvalidArgument on duplicate (word, original_id) or a bad dimension.
  EmbeddingStore build() &&;

 private:
  std::size_t dimension_;
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<SenseVector>> pending_;
  std::unordered_map<std::string, Eigen::VectorXd> globals_;
};

EmbeddingStore load_embeddings(const std::filesystem::path& path,
                               EmbeddingFormat format = EmbeddingFormat::canonical);
EmbeddingStore read_canonical(std::istream& in);
EmbeddingStore read_mssg(std::istream& in);

/// Canonical text format; floats use the shortest round-trip representation.
void write_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);
void write_canonical(const EmbeddingStore& store, std::ostream& out);

/// MSSG layout. Every sense must carry a cluster center and every word a
/// global vector (zeros are written where the store has none).
void write_mssg(const EmbeddingStore& store, const std::filesystem::path& path);
void write_mssg(const EmbeddingStore& store, std::ostream& out);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace pseudosense
