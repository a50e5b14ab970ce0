#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pseudosense/embedding_store.hpp"

namespace pseudosense {

/// Column label of the difference matrix: the column holds v_a - v_b for
/// `word`, with a and b given as the original (file) sense ids.
struct PairLabel {
  std::string word;
  std::int64_t sense_a = 0;
  std::int64_t sense_b = 0;

  PairLabel reversed() const { return {word, sense_b, sense_a}; }

  friend auto operator<=>(const PairLabel&, const PairLabel&) = default;
};

std::string to_string(const PairLabel& label);

/// D x N matrix of same-word sense differences, both orientations included.
struct DiffMatrix {
  Eigen::MatrixXd data;
  std::vector<PairLabel> labels;
  std::size_t source_dimension = 0;

  std::size_t cols() const noexcept { return labels.size(); }
  /// True when the store had no multi-sense word (N = 0).
  bool degenerate() const noexcept { return labels.empty(); }

  const PairLabel& column_label(std::size_t j) const;
  std::optional<std::size_t> find_column(const PairLabel& label) const;
};

/// Columns enumerate, per word in store order, every ordered pair (a, b) with
/// a != b in lexicographic order of dense sense ids. Single-sense words
/// contribute no columns. Throws InvalidArgument on an empty store.
DiffMatrix build_diff_matrix(const EmbeddingStore& store);

/// Sum over words of n_w * (n_w - 1).
std::size_t expected_column_count(const EmbeddingStore& store);

}  // namespace pseudosense
