#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "pseudosense/decompose.hpp"
#include "pseudosense/diff_matrix.hpp"
#include "pseudosense/embedding_store.hpp"
#include "pseudosense/eval.hpp"

namespace pseudosense {

/// M = L* + S* + E* with known parts. All randomness comes from Rng(seed).
struct PlantedInstance {
  Eigen::MatrixXd matrix;
  Eigen::MatrixXd low_rank;
  Eigen::MatrixXd sparse;
  Eigen::MatrixXd noise;
  /// D x r orthonormal basis of the column space of `low_rank`.
  Eigen::MatrixXd true_subspace;
  BoolMatrix support;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  std::size_t support_size() const { return static_cast<std::size_t>(support.count()); }
};

struct PlantedOptions {
  std::size_t rows = 50;
  std::size_t cols = 400;
  std::size_t rank = 3;
  double sparse_density = 0.01;
  double sparse_magnitude = 0.1;
  double sigma = 0.01;
  std::uint64_t seed = 0;
  /// Columns come in (c, -c) pairs, like a difference matrix. Requires even cols.
  bool mirrored = false;
  /// Standard deviation of the low-rank coefficients.
  double coefficient_scale = 1.0;
};

/// Draw order: D x r Gaussian basis (column-major, then Householder QR),
/// r x N Gaussian coefficients, then per entry in column-major order a
/// Bernoulli(density) draw followed by a sign draw when selected, then the
/// D x N Gaussian noise. With `mirrored`, only the even columns are drawn.
PlantedInstance generate_planted(const PlantedOptions& opts);

PlantedInstance generate_planted(std::size_t rows, std::size_t cols, std::size_t rank,
                                 double sparse_density, double sparse_magnitude, double sigma,
                                 std::uint64_t seed);

struct ToyStoreOptions {
  std::size_t num_words = 20;
  /// Sense counts, cycled over the words.
  std::vector<std::size_t> senses_per_word{2};
  std::size_t dimension = 10;
  /// When set, every pseudo word's senses differ only along this direction (plus noise).
  std::optional<Eigen::VectorXd> pseudo_direction;
  std::uint64_t seed = 0;
  double noise_sigma = 0.0;
  /// Scale of the per-sense offsets (multiples of the direction, or random vectors).
  double offset_scale = 1.0;
  /// Fraction of multi-sense words whose senses get independent random offsets
  /// (real multi-senses) even when a pseudo direction is given.
  double real_sense_fraction = 0.0;
};

struct ToyStore {
  EmbeddingStore store;
  /// Unordered (a < b) sense pairs that differ only by the pseudo direction.
  std::vector<PairLabel> pseudo_pairs;
  std::vector<std::string> real_sense_words;
};

/// Words are named w0000, w0001, ...; sense vectors are base + offset + noise.
ToyStore generate_toy_store(const ToyStoreOptions& opts);

struct BenchmarkOptions {
  std::size_t num_words = 60;
  std::size_t senses_per_word = 3;
  std::size_t dimension = 50;
  std::size_t num_topics = 6;
  std::size_t num_pairs = 400;
  double pseudo_scale = 8.0;
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;
};

/// Toy store plus a contextual similarity dataset built from ground truth.
///
/// Each word has a topic-driven meaning vector orthogonal to the pseudo
/// direction; its senses are that vector plus a random multiple of the pseudo
/// direction plus noise, so all of a word's senses mean the same thing. Each
/// sense gets its own random cluster center, and a single-sense marker token
/// ("ctx:<word>:<sense>") whose global vector equals that center steers
/// context-based sense selection. Gold scores are cosines between meaning
/// vectors, i.e. they treat pseudo senses as identical.
struct ContextualBenchmark {
  EmbeddingStore store;
  SimilarityDataset dataset;
  Eigen::VectorXd pseudo_direction;
};

ContextualBenchmark generate_contextual_benchmark(const BenchmarkOptions& opts);

}  // namespace pseudosense
