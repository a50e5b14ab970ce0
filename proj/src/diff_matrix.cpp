#include "pseudosense/diff_matrix.hpp"

#include "pseudosense/errors.hpp"

namespace pseudosense {

std::string to_string(const PairLabel& label) {
  return label.word + "_{" + std::to_string(label.sense_a) + "," + std::to_string(label.sense_b) +
         "}";
}

const PairLabel& DiffMatrix::column_label(std::size_t j) const {
  if (j >= labels.size()) {
    throw LookupError("column " + std::to_string(j) + " out of range (N = " +
                      std::to_string(labels.size()) + ")");
  }
  return labels[j];
}

std::optional<std::size_t> DiffMatrix::find_column(const PairLabel& label) const {
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] == label) return j;
  }
  return std::nullopt;
}

std::size_t expected_column_count(const EmbeddingStore& store) {
  std::size_t n = 0;
  for (const auto& word : store.words()) {
    const std::size_t k = store.num_senses(word);
    n += k * (k - 1);
  }
  return n;
}

DiffMatrix build_diff_matrix(const EmbeddingStore& store) {
  if (store.empty()) throw InvalidArgument("cannot build a difference matrix from an empty store");

  DiffMatrix m;
  m.source_dimension = store.dimension();
  const std::size_t n = expected_column_count(store);
  m.data.resize(static_cast<Eigen::Index>(store.dimension()), static_cast<Eigen::Index>(n));
  m.labels.reserve(n);

  Eigen::Index col = 0;
  for (const auto& word : store.words()) {
    const auto senses = store.senses_of(word);
    for (const auto& a : senses) {
      for (const auto& b : senses) {
        if (a.sense_id == b.sense_id) continue;
        m.data.col(col++) = a.vector - b.vector;
        m.labels.push_back({word, a.original_id, b.original_id});
      }
    }
  }
  return m;
}

}  // namespace pseudosense
