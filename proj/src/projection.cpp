#include "pseudosense/projection.hpp"

#include <string>

#include "pseudosense/decompose.hpp"
#include "pseudosense/errors.hpp"

namespace pseudosense {

ProjectionMatrix ProjectionMatrix::from_matrix(Eigen::MatrixXd t) {
  if (t.rows() != t.cols()) throw InvalidArgument("projection matrix must be square");
  const auto dim = t.rows();
  return ProjectionMatrix(std::move(t), Eigen::MatrixXd(dim, 0));
}

ProjectionMatrix build_projection(const Eigen::MatrixXd& components) {
  const auto dim = components.rows();
  const auto k = components.cols();
  if (k == 0) throw InvalidArgument("projection needs at least one component");
  if (k >= dim) {
    throw InvalidArgument("projection with k = " + std::to_string(k) + " components in dimension " +
                          std::to_string(dim) + " would annihilate everything");
  }
  if (!components.allFinite()) throw InvalidArgument("components contain non-finite entries");
  const Eigen::MatrixXd gram = components.transpose() * components;
  const double deviation = (gram - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff();
  if (deviation > 1e-8) {
    throw InvalidArgument("components are not orthonormal (Gram deviation " +
                          std::to_string(deviation) + ")");
  }
  Eigen::MatrixXd t = Eigen::MatrixXd::Identity(dim, dim) - components * components.transpose();
  t = 0.5 * (t + t.transpose()).eval();
  return ProjectionMatrix(std::move(t), components);
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& columns) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(columns);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(columns.rows(), columns.cols());
  canonicalize_signs(q);
  return q;
}

EmbeddingStore apply_projection(const ProjectionMatrix& t, const EmbeddingStore& store) {
  if (static_cast<std::size_t>(t.dimension()) != store.dimension()) {
    throw InvalidArgument("projection dimension " + std::to_string(t.dimension()) +
                          " does not match store dimension " + std::to_string(store.dimension()));
  }
  const Eigen::MatrixXd& m = t.matrix();
  return store.map_vectors([&m](const Eigen::VectorXd& v) -> Eigen::VectorXd { return m * v; });
}

std::pair<double, double> pseudo_sense_distance(const EmbeddingStore& before,
                                                const EmbeddingStore& after,
                                                const PairLabel& pair) {
  const auto& a0 = before.sense_by_original(pair.word, pair.sense_a).vector;
  const auto& b0 = before.sense_by_original(pair.word, pair.sense_b).vector;
  const auto& a1 = after.sense_by_original(pair.word, pair.sense_a).vector;
  const auto& b1 = after.sense_by_original(pair.word, pair.sense_b).vector;
  return {(a0 - b0).norm(), (a1 - b1).norm()};
}

}  // namespace pseudosense
