#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "pseudosense/diff_matrix.hpp"

namespace pseudosense {

enum class Method { pca, exrpca_iterative, exrpca_convex };

/// CLI spelling: pca | exrpca-iter | exrpca-cvx.
Method parse_method(std::string_view name);
std::string_view method_name(Method method);

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

struct SolverConfig {
  /// Rank d of L for pca and exrpca_iterative; ignored by the convex solver.
  std::size_t target_rank = 3;
  /// Weight of ||E||_F^2. Unset means lambda2.
  std::optional<double> lambda1;
  /// Weight of ||S||_1. Unset means 1 / sqrt(max(D, N)).
  std::optional<double> lambda2;
  std::size_t max_iterations = 100;
  /// Convex solver stops once ||M - L - E - S||_F / ||M||_F falls below this.
  double residual_tolerance = 1e-9;
  /// Penalty growth factor for mu.
  double rho = 6.0;
  /// mu grows when sqrt(mu) * ||delta(E + S)||_F / ||M||_F drops below this.
  double epsilon_mu = 1e-2;
  /// Upper bound on mu, as a multiple of its initial value.
  double mu_max_factor = 1e10;
  std::uint64_t seed = 0;

  double resolved_lambda2(Eigen::Index rows, Eigen::Index cols) const;
  double resolved_lambda1(Eigen::Index rows, Eigen::Index cols) const;
  /// Throws InvalidArgument on non-positive tolerances, rho <= 1 or lambdas <= 0.
  void validate() const;
};

/// M = L + E + S together with the principal directions of L.
struct Decomposition {
  Eigen::MatrixXd low_rank;
  Eigen::MatrixXd gaussian;
  Eigen::MatrixXd sparse;
  /// D x d, orthonormal columns, each flipped so its largest-magnitude entry is positive.
  Eigen::MatrixXd components;
  Eigen::VectorXd singular_values;
  Eigen::VectorXd explained_variance_ratio;
  Method method = Method::pca;
  std::size_t iterations_used = 0;
  /// False when the solver stopped at max_iterations.
  bool converged = true;
  /// ||M - (L + E + S)||_F / ||M||_F (0 for a zero input).
  double final_residual = 0.0;
  SolverConfig config;

  std::size_t num_components() const noexcept {
    return static_cast<std::size_t>(components.cols());
  }
};

/// R_a: elementwise sgn(x) * max(|x| - a, 0).
Eigen::MatrixXd soft_threshold(const Eigen::MatrixXd& x, double a);

/// D_a: U * R_a(Sigma) * V^T. Throws NumericalError on non-finite input.
Eigen::MatrixXd singular_value_threshold(const Eigen::MatrixXd& x, double a);

/// Root-mean-square of all entries (zero-mean assumption).
double estimate_sigma(const Eigen::MatrixXd& e);

/// Entries strictly outside [-3 sigma, 3 sigma].
BoolMatrix three_sigma_mask(const Eigen::MatrixXd& e, double sigma);

/// Flip each column so its largest-magnitude coordinate (first on ties) is positive.
void canonicalize_signs(Eigen::MatrixXd& columns);

Decomposition pca_decompose(const Eigen::MatrixXd& m, std::size_t d);
Decomposition pca_decompose(const DiffMatrix& m, std::size_t d);

/// Alternates rank-d PCA with three-sigma extraction of sparse noise until the
/// mask comes back empty or max_iterations is reached.
Decomposition exrpca_iterative(const Eigen::MatrixXd& m, const SolverConfig& cfg);
Decomposition exrpca_iterative(const DiffMatrix& m, const SolverConfig& cfg);

/// Inexact augmented Lagrange multiplier solver for
///   min ||L||_* + lambda1 ||E||_F^2 + lambda2 ||S||_1  s.t.  M = L + E + S.
Decomposition exrpca_convex(const Eigen::MatrixXd& m, const SolverConfig& cfg);
Decomposition exrpca_convex(const DiffMatrix& m, const SolverConfig& cfg);

Decomposition decompose(const Eigen::MatrixXd& m, Method method, const SolverConfig& cfg);

/// First k components (D x k). Throws InvalidArgument if k is 0 or exceeds
/// the available count.
Eigen::MatrixXd components_of(const Decomposition& dec, std::size_t k);

/// Directory layout:
///   components.txt   canonical embedding format, one "component#i" line per component
///   low_rank.bin, gaussian.bin, sparse.bin   binary matrix dumps (with labels)
///   metadata.json    method, config, iterations, residual, spectrum
void save_decomposition(const Decomposition& dec, const std::filesystem::path& dir,
                        std::span<const PairLabel> labels = {});
/// Loads metadata and components; the L/E/S matrices are loaded only when
/// `with_matrices` is set.
Decomposition load_decomposition(const std::filesystem::path& dir, bool with_matrices = true);

}  // namespace pseudosense
