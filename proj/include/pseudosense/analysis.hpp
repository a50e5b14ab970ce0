#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pseudosense/decompose.hpp"
#include "pseudosense/diff_matrix.hpp"
#include "pseudosense/embedding_store.hpp"

namespace pseudosense {

struct RankedPair {
  PairLabel label;
  double cosine = 0.0;
};

struct PairRanking {
  std::vector<RankedPair> pairs;
  std::size_t skipped_zero_norm = 0;
};

/// Top-n sense pairs by cosine with `component` (unit norm). Each unordered
/// pair is reported once, in the orientation with the larger cosine; ties
/// break on the label.
PairRanking rank_pairs_by_component(const DiffMatrix& m, const Eigen::VectorXd& component,
                                    std::size_t top_n);

/// "income_{2,4/4,5}, campaigns_{1,5}": same-word pairs grouped in rank order.
std::string render_grouped_pairs(std::span<const RankedPair> pairs);

/// ||S_p||_2 for the column labeled `pair`.
double sparse_norm_for_pair(const Decomposition& dec, const DiffMatrix& m, const PairLabel& pair);

struct Neighbor {
  std::string word;
  std::size_t sense_id = 0;
  std::int64_t original_id = 0;
  double cosine = 0.0;
};

/// Senses of other words ranked by cosine to (word, sense_id); sense_id is dense.
std::vector<Neighbor> nearest_neighbors(const EmbeddingStore& store, std::string_view word,
                                        std::size_t sense_id, std::size_t top_n);

struct ComponentReport {
  std::size_t component_index = 0;
  std::vector<RankedPair> top_pairs;
  double explained_variance_ratio = 0.0;
  double avg_cos_top = 0.0;
  /// Free text for a human summary of the component; never filled automatically.
  std::string annotation;
};

std::vector<ComponentReport> explained_variance_report(const Decomposition& dec,
                                                       const DiffMatrix& m,
                                                       std::size_t top_n = 5);

struct NoiseIndicatorReport {
  PairLabel pair;
  double s_norm = 0.0;
  std::vector<Neighbor> neighbors_a;
  std::vector<Neighbor> neighbors_b;
};

NoiseIndicatorReport noise_indicator(const Decomposition& dec, const DiffMatrix& m,
                                     const EmbeddingStore& store, const PairLabel& pair,
                                     std::size_t top_n = 5);

// Fixed six-decimal TSV renderings plus JSON equivalents.
void write_variance_tsv(std::ostream& out, std::span<const ComponentReport> reports);
void write_noise_tsv(std::ostream& out, std::span<const NoiseIndicatorReport> reports);
void write_neighbors_tsv(std::ostream& out, std::span<const Neighbor> neighbors);
std::string variance_json(std::span<const ComponentReport> reports);
std::string noise_json(std::span<const NoiseIndicatorReport> reports);
std::string neighbors_json(std::span<const Neighbor> neighbors);

}  // namespace pseudosense
