#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pseudosense/decompose.hpp"
#include "pseudosense/embedding_store.hpp"
#include "pseudosense/errors.hpp"
#include "pseudosense/eval.hpp"

namespace pseudosense {

inline constexpr std::string_view kVersion = "0.1.0";

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "PSEUDOSENSE_OUTPUT_DIR";

/// Failure inside one pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct DatasetSpec {
  std::filesystem::path path;
  DatasetFormat format = DatasetFormat::scws;
  Metric metric = Metric::local_sim;
};

struct PipelineConfig {
  std::filesystem::path embeddings;
  EmbeddingFormat embedding_format = EmbeddingFormat::canonical;
  std::vector<DatasetSpec> datasets;
  std::filesystem::path output_dir;
  Method method = Method::exrpca_iterative;
  SolverConfig solver;
  /// Number of components to project out; defaults to the target rank (pca,
  /// exrpca-iter) or the effective rank of L (exrpca-cvx).
  std::optional<std::size_t> projection_k;
  std::size_t window = 5;
  bool lowercase = false;

  /// Throws InvalidArgument when a referenced path is missing or a value is out of range.
  void validate() const;
};

/// Reads a JSON config file. Keys mirror the CLI flags (see README).
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
/// Overlays keys from a JSON config file onto `cfg`.
void merge_pipeline_config(PipelineConfig& cfg, const std::filesystem::path& path);
/// Canonical JSON used for the manifest and its hash.
std::string canonical_config_json(const PipelineConfig& cfg);

struct Artifact {
  std::string name;
  std::filesystem::path path;
  std::string digest;
};

struct PipelineResult {
  std::filesystem::path manifest_path;
  std::string manifest_hash;
  std::vector<Artifact> artifacts;
  std::vector<EvalReport> baseline_reports;
  std::vector<EvalReport> projected_reports;
};

/// build-matrix -> decompose -> project -> evaluate, then a manifest.
///
/// Every artifact is written under a ".partial" name and renamed once its
/// stage succeeds; a failing stage throws StageError and leaves its partial
/// output behind.
PipelineResult run_pipeline(const PipelineConfig& cfg);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
/// Digest of a file, or of a directory's files in sorted name order.
std::string digest_path(const std::filesystem::path& path);

}  // namespace pseudosense
