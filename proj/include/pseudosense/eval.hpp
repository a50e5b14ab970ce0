#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "pseudosense/decompose.hpp"
#include "pseudosense/embedding_store.hpp"

namespace pseudosense {

/// Whitespace-tokenized sentence with the index of the target word.
struct Context {
  std::vector<std::string> tokens;
  std::size_t target = 0;
};

struct SimilarityPair {
  std::string word1;
  std::string word2;
  std::optional<Context> context1;
  std::optional<Context> context2;
  double gold = 0.0;
};

struct SimilarityDataset {
  std::string name;
  std::vector<SimilarityPair> pairs;
  bool contextual = false;
  /// Non-fatal load diagnostics (e.g. unexpected pair count).
  std::vector<std::string> warnings;
};

enum class DatasetFormat { ws353, scws };
enum class Metric { avg_sim, local_sim };

DatasetFormat parse_dataset_format(std::string_view name);
Metric parse_metric(std::string_view name);
std::string_view metric_name(Metric metric);

struct DatasetOptions {
  bool lowercase = false;
};

/// "word1,word2,score" (comma or tab separated) with an optional header line.
SimilarityDataset load_ws353(const std::filesystem::path& path, const DatasetOptions& opts = {});
SimilarityDataset read_ws353(std::istream& in, std::string name, const DatasetOptions& opts = {});

/// Tab-separated: id, word1, POS1, word2, POS2, context1, context2, mean rating,
/// individual ratings. The target inside each context is wrapped in <b>...</b>.
SimilarityDataset load_scws(const std::filesystem::path& path, const DatasetOptions& opts = {});
SimilarityDataset read_scws(std::istream& in, std::string name, const DatasetOptions& opts = {});

SimilarityDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                               const DatasetOptions& opts = {});

/// Extracts the tokens and target index from a marker-wrapped sentence.
Context parse_marked_context(std::string_view text, bool lowercase = false);

// Writes a contextual dataset in the SCWS layout; POS fields are "n", no individual ratings.
void write_scws(const SimilarityDataset& ds, std::ostream& out);
void write_scws(const SimilarityDataset& ds, const std::filesystem::path& path);

/// Cosine similarity; 0 when either vector has zero norm.
double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Mean cosine over all cross-word sense pairs. Throws LookupError for OOV words.
double avg_sim(const EmbeddingStore& store, std::string_view w1, std::string_view w2);

/// Mean of the context vectors of tokens within +-window of the target
/// (target excluded). A token contributes its global vector when the store has
/// one, else its first sense vector; unknown tokens are skipped. nullopt when
/// nothing contributes.
std::optional<Eigen::VectorXd> context_representation(const EmbeddingStore& store,
                                                      const Context& ctx, std::size_t window);

/// argmax over senses of cos(context, cluster center), using the sense vector
/// when a sense has no center. The lowest sense id wins ties.
std::size_t select_sense(const EmbeddingStore& store, std::string_view word,
                         const Eigen::VectorXd& context);

struct LocalSimResult {
  double score = 0.0;
  /// True when a context was unusable and avg_sim was returned instead.
  bool context_fallback = false;
};

LocalSimResult local_sim_scored(const EmbeddingStore& store, std::string_view w1,
                                const Context& ctx1, std::string_view w2, const Context& ctx2,
                                std::size_t window = 5);

double local_sim(const EmbeddingStore& store, std::string_view w1, const Context& ctx1,
                 std::string_view w2, const Context& ctx2, std::size_t window = 5);

/// 1-based ranks; tied values share the mean of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of the average-rank vectors. nullopt when either list
/// has zero rank variance. Throws InvalidArgument on length mismatch or fewer
/// than two entries.
std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys);

struct EvalOptions {
  Metric metric = Metric::avg_sim;
  std::size_t window = 5;
};

struct EvalReport {
  std::string dataset;
  Metric metric = Metric::avg_sim;
  double spearman_x100 = 0.0;
  std::size_t pairs_scored = 0;
  std::size_t pairs_skipped_oov = 0;
  std::size_t context_fallbacks = 0;
  std::optional<std::size_t> rank_of_L;
};

/// Scores every in-vocabulary pair and correlates against the gold ratings.
/// Throws InvalidArgument when local_sim is requested on a context-free
/// dataset, and Error when every pair is skipped or the correlation is undefined.
EvalReport evaluate(const EmbeddingStore& store, const SimilarityDataset& ds,
                    const EvalOptions& opts = {});

struct SweepPoint {
  std::size_t k = 0;
  double spearman_x100 = 0.0;
};

/// For each k, projects out the first k components of `dec` and evaluates;
/// k = 0 is the unprojected baseline.
std::vector<SweepPoint> dimension_sweep(const EmbeddingStore& store, const Decomposition& dec,
                                        const SimilarityDataset& ds,
                                        std::span<const std::size_t> ks,
                                        const EvalOptions& opts = {});

/// One-decimal rendering used in CLI and report output.
std::string format_x100(double value);

void write_eval_report_tsv(std::ostream& out, std::span<const EvalReport> reports);
std::string eval_report_json(std::span<const EvalReport> reports);

}  // namespace pseudosense
