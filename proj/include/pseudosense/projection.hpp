#pragma once

#include <utility>

#include <Eigen/Dense>

#include "pseudosense/diff_matrix.hpp"
#include "pseudosense/embedding_store.hpp"

namespace pseudosense {

/// Orthogonal projector onto the complement of span(basis): T = I - B B^T.
///
/// T sends every basis vector to 0 and fixes every vector orthogonal to the
/// basis; it is the only linear map with both properties.
class ProjectionMatrix {
 public:
  /// Wraps an arbitrary D x D matrix without checks (tests, identity baselines).
  static ProjectionMatrix from_matrix(Eigen::MatrixXd t);

  const Eigen::MatrixXd& matrix() const noexcept { return data_; }
  /// D x k orthonormal basis of the annihilated subspace (empty for from_matrix).
  const Eigen::MatrixXd& basis() const noexcept { return basis_; }
  Eigen::Index dimension() const noexcept { return data_.rows(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return data_ * v; }

 private:
  friend ProjectionMatrix build_projection(const Eigen::MatrixXd& components);
  ProjectionMatrix(Eigen::MatrixXd data, Eigen::MatrixXd basis)
      : data_(std::move(data)), basis_(std::move(basis)) {}

  Eigen::MatrixXd data_;
  Eigen::MatrixXd basis_;
};

/// `components` is D x k with orthonormal columns (Gram deviation <= 1e-8)
/// and 1 <= k < D; anything else throws InvalidArgument.
ProjectionMatrix build_projection(const Eigen::MatrixXd& components);

/// Thin-QR re-orthonormalization with the largest-entry-positive sign convention.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& columns);

/// Replaces every sense vector v with T v. Cluster centers and global vectors
/// are left as they are, since sense selection runs in the original space.
EmbeddingStore apply_projection(const ProjectionMatrix& t, const EmbeddingStore& store);

/// Euclidean distance between the two senses of `pair` before and after.
/// Sense ids in `pair` are original ids.
std::pair<double, double> pseudo_sense_distance(const EmbeddingStore& before,
                                                const EmbeddingStore& after,
                                                const PairLabel& pair);

}  // namespace pseudosense
