#include "pseudosense/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "pseudosense/errors.hpp"
#include "pseudosense/matrix_io.hpp"

namespace pseudosense {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void require_finite(const MatrixXd& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string(what) + " contains non-finite entries");
}

double relative_residual(const MatrixXd& m, const MatrixXd& l, const MatrixXd& e,
                         const MatrixXd& s) {
  const double norm = m.norm();
  if (norm == 0.0) return (l + e + s).norm();
  return (m - l - e - s).norm() / norm;
}

VectorXd variance_ratios(const VectorXd& all_singular_values, Index keep) {
  VectorXd ratios = VectorXd::Zero(keep);
  const double total = all_singular_values.squaredNorm();
  if (total == 0.0) return ratios;
  for (Index i = 0; i < keep; ++i) ratios[i] = all_singular_values[i] * all_singular_values[i] / total;
  return ratios;
}

}  // namespace

Method parse_method(std::string_view name) {
  if (name == "pca") return Method::pca;
  if (name == "exrpca-iter" || name == "exrpca_iterative") return Method::exrpca_iterative;
  if (name == "exrpca-cvx" || name == "exrpca_convex") return Method::exrpca_convex;
  throw InvalidArgument("unknown method '" + std::string(name) + "'");
}

std::string_view method_name(Method method) {
  switch (method) {
    case Method::pca:
      return "pca";
    case Method::exrpca_iterative:
      return "exrpca-iter";
    case Method::exrpca_convex:
      return "exrpca-cvx";
  }
  return "unknown";
}

double SolverConfig::resolved_lambda2(Index rows, Index cols) const {
  if (lambda2) return *lambda2;
  return 1.0 / std::sqrt(static_cast<double>(std::max<Index>({rows, cols, 1})));
}

double SolverConfig::resolved_lambda1(Index rows, Index cols) const {
  return lambda1 ? *lambda1 : resolved_lambda2(rows, cols);
}

void SolverConfig::validate() const {
  if (target_rank == 0) throw InvalidArgument("target rank must be positive");
  if (max_iterations == 0) throw InvalidArgument("max_iterations must be positive");
  if (!(residual_tolerance > 0.0)) throw InvalidArgument("residual tolerance must be positive");
  if (!(rho > 1.0)) throw InvalidArgument("rho must be greater than 1");
  if (!(epsilon_mu > 0.0)) throw InvalidArgument("epsilon_mu must be positive");
  if (!(mu_max_factor >= 1.0)) throw InvalidArgument("mu_max_factor must be at least 1");
  if (lambda1 && !(*lambda1 > 0.0)) throw InvalidArgument("lambda1 must be positive");
  if (lambda2 && !(*lambda2 > 0.0)) throw InvalidArgument("lambda2 must be positive");
}

// ---------------------------------------------------------------------------
// Operators

MatrixXd soft_threshold(const MatrixXd& x, double a) {
  if (!(a >= 0.0)) throw InvalidArgument("threshold must be non-negative");
  return x.unaryExpr([a](double v) {
    const double shrunk = std::abs(v) - a;
    return shrunk > 0.0 ? std::copysign(shrunk, v) : 0.0;
  });
}

MatrixXd singular_value_threshold(const MatrixXd& x, double a) {
  if (!(a >= 0.0)) throw InvalidArgument("threshold must be non-negative");
  require_finite(x, "singular value threshold input");
  if (x.size() == 0) return x;
  Eigen::BDCSVD<MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD failed");
  const VectorXd shrunk = (svd.singularValues().array() - a).max(0.0).matrix();
  Index keep = 0;
  while (keep < shrunk.size() && shrunk[keep] > 0.0) ++keep;
  if (keep == 0) return MatrixXd::Zero(x.rows(), x.cols());
  return svd.matrixU().leftCols(keep) * shrunk.head(keep).asDiagonal() *
         svd.matrixV().leftCols(keep).transpose();
}

double estimate_sigma(const MatrixXd& e) {
  if (e.size() == 0) throw InvalidArgument("cannot estimate sigma of an empty matrix");
  return std::sqrt(e.squaredNorm() / static_cast<double>(e.size()));
}

BoolMatrix three_sigma_mask(const MatrixXd& e, double sigma) {
  return e.array().abs() > 3.0 * sigma;
}

void canonicalize_signs(MatrixXd& columns) {
  for (Index j = 0; j < columns.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < columns.rows(); ++i) {
      const double mag = std::abs(columns(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (columns.rows() > 0 && columns(arg, j) < 0.0) columns.col(j) *= -1.0;
  }
}

// ---------------------------------------------------------------------------
// PCA

Decomposition pca_decompose(const MatrixXd& m, std::size_t d) {
  const auto min_dim = static_cast<std::size_t>(std::min(m.rows(), m.cols()));
  if (m.cols() == 0) throw InvalidArgument("PCA on a matrix with no columns");
  if (d == 0 || d > min_dim) {
    throw InvalidArgument("PCA rank " + std::to_string(d) + " outside [1, " +
                          std::to_string(min_dim) + "]");
  }
  require_finite(m, "PCA input");

  const VectorXd mean = m.rowwise().mean();
  const MatrixXd centered = m.colwise() - mean;
  Eigen::BDCSVD<MatrixXd> svd(centered, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD failed");

  const auto rank = static_cast<Index>(d);
  Decomposition dec;
  dec.method = Method::pca;
  dec.components = svd.matrixU().leftCols(rank);
  canonicalize_signs(dec.components);
  dec.singular_values = svd.singularValues().head(rank);
  dec.explained_variance_ratio = variance_ratios(svd.singularValues(), rank);

  dec.low_rank = dec.components * (dec.components.transpose() * centered);
  dec.low_rank.colwise() += mean;
  dec.gaussian = m - dec.low_rank;
  dec.sparse = MatrixXd::Zero(m.rows(), m.cols());
  dec.iterations_used = 1;
  dec.converged = true;
  dec.final_residual = relative_residual(m, dec.low_rank, dec.gaussian, dec.sparse);
  dec.config.target_rank = d;
  return dec;
}

Decomposition pca_decompose(const DiffMatrix& m, std::size_t d) { return pca_decompose(m.data, d); }

// ---------------------------------------------------------------------------
// Iterative Ex-RPCA

Decomposition exrpca_iterative(const MatrixXd& m, const SolverConfig& cfg) {
  cfg.validate();
  require_finite(m, "Ex-RPCA input");

  MatrixXd current = m;
  MatrixXd sparse = MatrixXd::Zero(m.rows(), m.cols());
  for (std::size_t t = 1;; ++t) {
    Decomposition step = pca_decompose(current, cfg.target_rank);
    const double sigma = estimate_sigma(step.gaussian);
    const BoolMatrix mask = three_sigma_mask(step.gaussian, sigma);
    const bool empty_mask = !mask.any();

    if (empty_mask || t == cfg.max_iterations) {
      step.method = Method::exrpca_iterative;
      step.sparse = std::move(sparse);
      step.iterations_used = t;
      step.converged = empty_mask;
      step.final_residual = relative_residual(m, step.low_rank, step.gaussian, step.sparse);
      step.config = cfg;
      return step;
    }

    const MatrixXd extracted = mask.select(step.gaussian, 0.0);
    sparse += extracted;
    current -= extracted;
  }
}

Decomposition exrpca_iterative(const DiffMatrix& m, const SolverConfig& cfg) {
  return exrpca_iterative(m.data, cfg);
}

// ---------------------------------------------------------------------------
// Convex Ex-RPCA (inexact ALM)

Decomposition exrpca_convex(const MatrixXd& m, const SolverConfig& cfg) {
  cfg.validate();
  require_finite(m, "Ex-RPCA input");

  const Index rows = m.rows();
  const Index cols = m.cols();
  Decomposition dec;
  dec.method = Method::exrpca_convex;
  dec.config = cfg;
  dec.low_rank = MatrixXd::Zero(rows, cols);
  dec.gaussian = MatrixXd::Zero(rows, cols);
  dec.sparse = MatrixXd::Zero(rows, cols);

  const double norm_m = m.norm();
  if (norm_m == 0.0 || m.size() == 0) {
    dec.components.resize(rows, 0);
    dec.singular_values.resize(0);
    dec.explained_variance_ratio.resize(0);
    dec.iterations_used = 1;
    dec.converged = true;
    dec.final_residual = 0.0;
    return dec;
  }

  const double lambda2 = cfg.resolved_lambda2(rows, cols);
  const double lambda1 = cfg.resolved_lambda1(rows, cols);

  const MatrixXd signs = m.unaryExpr([](double v) { return static_cast<double>((v > 0) - (v < 0)); });
  const double sign_norm = Eigen::BDCSVD<MatrixXd>(signs).singularValues()(0);

  double mu = 0.5 / sign_norm;
  const double mu_max = mu * cfg.mu_max_factor;
  MatrixXd& low_rank = dec.low_rank;
  MatrixXd& gaussian = dec.gaussian;
  MatrixXd& sparse = dec.sparse;
  MatrixXd multiplier = m / sign_norm;

  double residual = 1.0;
  std::size_t t = 0;
  while (t < cfg.max_iterations) {
    ++t;
    const MatrixXd noise_before = gaussian + sparse;

    low_rank = singular_value_threshold(m - gaussian - sparse + multiplier / mu, 1.0 / mu);
    gaussian = (mu / (mu + 2.0 * lambda1)) * (m - low_rank - sparse + multiplier / mu);
    sparse = soft_threshold(m - low_rank - gaussian + multiplier / mu, lambda2 / mu);

    const MatrixXd gap = m - low_rank - gaussian - sparse;
    multiplier += mu * gap;
    if (!low_rank.allFinite() || !gaussian.allFinite() || !sparse.allFinite() ||
        !multiplier.allFinite()) {
      throw NumericalError("non-finite iterate at iteration " + std::to_string(t) +
                           " (check lambda1/lambda2)");
    }

    residual = gap.norm() / norm_m;
    const double change = std::sqrt(mu) * (gaussian + sparse - noise_before).norm() / norm_m;
    if (change < cfg.epsilon_mu) mu = std::min(mu * cfg.rho, mu_max);
    if (residual < cfg.residual_tolerance) break;
  }

  dec.iterations_used = t;
  dec.converged = residual < cfg.residual_tolerance;
  dec.final_residual = residual;

  Eigen::BDCSVD<MatrixXd> svd(low_rank, Eigen::ComputeThinU);
  const VectorXd& sv = svd.singularValues();
  Index effective = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    while (effective < sv.size() && sv(effective) > 1e-8 * sv(0)) ++effective;
  }
  dec.components = svd.matrixU().leftCols(effective);
  canonicalize_signs(dec.components);
  dec.singular_values = sv.head(effective);
  dec.explained_variance_ratio = variance_ratios(sv, effective);
  return dec;
}

Decomposition exrpca_convex(const DiffMatrix& m, const SolverConfig& cfg) {
  return exrpca_convex(m.data, cfg);
}

Decomposition decompose(const MatrixXd& m, Method method, const SolverConfig& cfg) {
  switch (method) {
    case Method::pca: {
      cfg.validate();
      auto dec = pca_decompose(m, cfg.target_rank);
      dec.config = cfg;
      return dec;
    }
    case Method::exrpca_iterative:
      return exrpca_iterative(m, cfg);
    case Method::exrpca_convex:
      return exrpca_convex(m, cfg);
  }
  throw InvalidArgument("unknown method");
}

MatrixXd components_of(const Decomposition& dec, std::size_t k) {
  if (k == 0) throw InvalidArgument("k must be positive");
  if (k > dec.num_components()) {
    throw InvalidArgument("requested " + std::to_string(k) + " components, only " +
                          std::to_string(dec.num_components()) + " available");
  }
  return dec.components.leftCols(static_cast<Index>(k));
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

nlohmann::json vector_to_json(const VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

VectorXd json_to_vector(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(values.data(), static_cast<Index>(values.size()));
}

}  // namespace

void save_decomposition(const Decomposition& dec, const std::filesystem::path& dir,
                        std::span<const PairLabel> labels) {
  std::filesystem::create_directories(dir);

  const auto dim = static_cast<std::size_t>(dec.components.rows());
  {
    std::ofstream out(dir / "components.txt", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write components to '" + dir.string() + "'");
    out << dec.components.cols() << ' ' << dim << '\n';
    for (Index j = 0; j < dec.components.cols(); ++j) {
      out << "component#" << j;
      for (Index i = 0; i < dec.components.rows(); ++i) out << ' ' << format_double(dec.components(i, j));
      out << '\n';
    }
    if (!out) throw IoError("write failed for components");
  }
  write_matrix_dump(dir / "low_rank.bin", dec.low_rank, labels);
  write_matrix_dump(dir / "gaussian.bin", dec.gaussian, labels);
  write_matrix_dump(dir / "sparse.bin", dec.sparse, labels);

  nlohmann::ordered_json meta;
  meta["method"] = method_name(dec.method);
  meta["rows"] = dec.low_rank.rows();
  meta["cols"] = dec.low_rank.cols();
  meta["num_components"] = dec.components.cols();
  meta["iterations_used"] = dec.iterations_used;
  meta["converged"] = dec.converged;
  meta["final_residual"] = dec.final_residual;
  meta["singular_values"] = vector_to_json(dec.singular_values);
  meta["explained_variance_ratio"] = vector_to_json(dec.explained_variance_ratio);
  auto& c = meta["config"];
  c["target_rank"] = dec.config.target_rank;
  c["lambda1"] = dec.config.lambda1 ? nlohmann::json(*dec.config.lambda1) : nlohmann::json(nullptr);
  c["lambda2"] = dec.config.lambda2 ? nlohmann::json(*dec.config.lambda2) : nlohmann::json(nullptr);
  c["max_iterations"] = dec.config.max_iterations;
  c["residual_tolerance"] = dec.config.residual_tolerance;
  c["rho"] = dec.config.rho;
  c["epsilon_mu"] = dec.config.epsilon_mu;
  c["mu_max_factor"] = dec.config.mu_max_factor;
  c["seed"] = dec.config.seed;

  std::ofstream out(dir / "metadata.json", std::ios::trunc);
  if (!out) throw IoError("cannot write metadata to '" + dir.string() + "'");
  out << meta.dump(2) << '\n';
}

Decomposition load_decomposition(const std::filesystem::path& dir, bool with_matrices) {
  std::ifstream meta_in(dir / "metadata.json");
  if (!meta_in) throw IoError("no metadata.json in '" + dir.string() + "'");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(meta_in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("metadata.json: ") + e.what());
  }

  Decomposition dec;
  try {
    dec.method = parse_method(meta.at("method").get<std::string>());
    dec.iterations_used = meta.at("iterations_used").get<std::size_t>();
    dec.converged = meta.at("converged").get<bool>();
    dec.final_residual = meta.at("final_residual").get<double>();
    dec.singular_values = json_to_vector(meta.at("singular_values"));
    dec.explained_variance_ratio = json_to_vector(meta.at("explained_variance_ratio"));
    const auto& c = meta.at("config");
    dec.config.target_rank = c.at("target_rank").get<std::size_t>();
    if (!c.at("lambda1").is_null()) dec.config.lambda1 = c.at("lambda1").get<double>();
    if (!c.at("lambda2").is_null()) dec.config.lambda2 = c.at("lambda2").get<double>();
    dec.config.max_iterations = c.at("max_iterations").get<std::size_t>();
    dec.config.residual_tolerance = c.at("residual_tolerance").get<double>();
    dec.config.rho = c.at("rho").get<double>();
    dec.config.epsilon_mu = c.at("epsilon_mu").get<double>();
    dec.config.mu_max_factor = c.at("mu_max_factor").get<double>();
    dec.config.seed = c.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("metadata.json: ") + e.what());
  }

  const auto comps = load_embeddings(dir / "components.txt");
  dec.components.resize(static_cast<Index>(comps.dimension()), static_cast<Index>(comps.size()));
  for (const auto& s : comps.senses()) {
    if (s.original_id < 0 || static_cast<std::size_t>(s.original_id) >= comps.size()) {
      throw FormatError("unexpected component id " + std::to_string(s.original_id));
    }
    dec.components.col(s.original_id) = s.vector;
  }

  if (with_matrices) {
    dec.low_rank = read_matrix_dump(dir / "low_rank.bin").data;
    dec.gaussian = read_matrix_dump(dir / "gaussian.bin").data;
    dec.sparse = read_matrix_dump(dir / "sparse.bin").data;
  }
  return dec;
}

}  // namespace pseudosense
