#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "pseudosense/analysis.hpp"
#include "pseudosense/decompose.hpp"
#include "pseudosense/diff_matrix.hpp"
#include "pseudosense/embedding_store.hpp"
#include "pseudosense/errors.hpp"
#include "pseudosense/eval.hpp"
#include "pseudosense/matrix_io.hpp"
#include "pseudosense/pipeline.hpp"
#include "pseudosense/projection.hpp"
#include "pseudosense/synth.hpp"

namespace py = pybind11;
using namespace pseudosense;

namespace {

using LabelTuple = std::tuple<std::string, std::int64_t, std::int64_t>;

LabelTuple to_tuple(const PairLabel& l) { return {l.word, l.sense_a, l.sense_b}; }
PairLabel to_label(const LabelTuple& t) { return {std::get<0>(t), std::get<1>(t), std::get<2>(t)}; }

std::vector<LabelTuple> to_tuples(const std::vector<PairLabel>& labels) {
  std::vector<LabelTuple> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(to_tuple(l));
  return out;
}

// Translators run newest first, so the base class goes in before its subclasses.
void bind_errors(py::module_& m) {
  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<LookupError>(m, "LookupError", base.ptr());
  py::register_exception<FormatError>(m, "FormatError", base.ptr());
  py::register_exception<StageError>(m, "StageError", base.ptr());
}

void bind_store(py::module_& m) {
  py::class_<SenseVector>(m, "SenseVector")
      .def_readonly("word", &SenseVector::word)
      .def_readonly("sense_id", &SenseVector::sense_id)
      .def_readonly("original_id", &SenseVector::original_id)
      .def_readonly("vector", &SenseVector::vector)
      .def_readonly("cluster_center", &SenseVector::cluster_center)
      .def("__repr__", [](const SenseVector& s) {
        return "<SenseVector " + s.word + "#" + std::to_string(s.original_id) + ">";
      });

  py::class_<EmbeddingStore>(m, "EmbeddingStore")
      .def_property_readonly("dimension", &EmbeddingStore::dimension)
      .def_property_readonly("words", &EmbeddingStore::words)
      .def("__len__", &EmbeddingStore::size)
      .def("__contains__", [](const EmbeddingStore& s, const std::string& w) { return s.contains(w); })
      .def("num_senses", [](const EmbeddingStore& s, const std::string& w) { return s.num_senses(w); })
      .def("sense", [](const EmbeddingStore& s, const std::string& w, std::size_t id) { return s.sense(w, id); },
           py::arg("word"), py::arg("sense_id"))
      .def("sense_by_original",
           [](const EmbeddingStore& s, const std::string& w, std::int64_t id) { return s.sense_by_original(w, id); },
           py::arg("word"), py::arg("original_id"))
      .def("senses_of",
           [](const EmbeddingStore& s, const std::string& w) {
             const auto span = s.senses_of(w);
             return std::vector<SenseVector>(span.begin(), span.end());
           })
      .def("global_vector",
           [](const EmbeddingStore& s, const std::string& w) -> std::optional<Eigen::VectorXd> {
             const auto* v = s.global_vector(w);
             return v ? std::optional<Eigen::VectorXd>(*v) : std::nullopt;
           })
      .def("__eq__", [](const EmbeddingStore& a, const EmbeddingStore& b) { return a == b; });

  py::class_<EmbeddingStoreBuilder>(m, "EmbeddingStoreBuilder")
      .def(py::init<std::size_t>(), py::arg("dimension"))
      .def(
          "add_sense",
          [](EmbeddingStoreBuilder& b, std::string word, std::int64_t id, Eigen::VectorXd v,
             std::optional<Eigen::VectorXd> center) -> EmbeddingStoreBuilder& {
            return b.add_sense(std::move(word), id, std::move(v), std::move(center));
          },
          py::arg("word"), py::arg("original_id"), py::arg("vector"), py::arg("cluster_center") = py::none(),
          py::return_value_policy::reference_internal)
      .def(
          "set_global_vector",
          [](EmbeddingStoreBuilder& b, std::string word, Eigen::VectorXd v) -> EmbeddingStoreBuilder& {
            return b.set_global_vector(std::move(word), std::move(v));
          },
          py::return_value_policy::reference_internal)
      .def("build", [](EmbeddingStoreBuilder& b) { return std::move(b).build(); },
           "Validate and return the store; the builder is left empty.");

  m.def(
      "load_embeddings",
      [](const std::filesystem::path& p, const std::string& format) {
        return load_embeddings(p, parse_embedding_format(format));
      },
      py::arg("path"), py::arg("format") = "canonical");
  m.def(
      "write_embeddings",
      [](const EmbeddingStore& s, const std::filesystem::path& p, const std::string& format) {
        if (parse_embedding_format(format) == EmbeddingFormat::mssg) {
          write_mssg(s, p);
        } else {
          write_embeddings(s, p);
        }
      },
      py::arg("store"), py::arg("path"), py::arg("format") = "canonical");
}

void bind_matrix(py::module_& m) {
  py::class_<DiffMatrix>(m, "DiffMatrix")
      .def_readonly("data", &DiffMatrix::data)
      .def_property_readonly("labels", [](const DiffMatrix& d) { return to_tuples(d.labels); })
      .def_readonly("source_dimension", &DiffMatrix::source_dimension)
      .def_property_readonly("degenerate", &DiffMatrix::degenerate)
      .def("find_column",
           [](const DiffMatrix& d, const LabelTuple& l) { return d.find_column(to_label(l)); });

  m.def("build_diff_matrix", &build_diff_matrix, py::arg("store"));
  m.def("expected_column_count", &expected_column_count, py::arg("store"));
  m.def("write_diff_matrix", &write_diff_matrix, py::arg("path"), py::arg("matrix"));
  m.def("read_diff_matrix", &read_diff_matrix, py::arg("path"));
  m.def(
      "write_matrix_dump",
      [](const std::filesystem::path& p, const Eigen::MatrixXd& data) { write_matrix_dump(p, data); },
      py::arg("path"), py::arg("data"));
  m.def("read_matrix_dump", [](const std::filesystem::path& p) { return read_matrix_dump(p).data; },
        py::arg("path"));
}

void bind_decompose(py::module_& m) {
  py::enum_<Method>(m, "Method")
      .value("pca", Method::pca)
      .value("exrpca_iterative", Method::exrpca_iterative)
      .value("exrpca_convex", Method::exrpca_convex);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("target_rank", &SolverConfig::target_rank)
      .def_readwrite("lambda1", &SolverConfig::lambda1)
      .def_readwrite("lambda2", &SolverConfig::lambda2)
      .def_readwrite("max_iterations", &SolverConfig::max_iterations)
      .def_readwrite("residual_tolerance", &SolverConfig::residual_tolerance)
      .def_readwrite("rho", &SolverConfig::rho)
      .def_readwrite("epsilon_mu", &SolverConfig::epsilon_mu)
      .def_readwrite("mu_max_factor", &SolverConfig::mu_max_factor)
      .def_readwrite("seed", &SolverConfig::seed);

  py::class_<Decomposition>(m, "Decomposition")
      .def_readonly("low_rank", &Decomposition::low_rank)
      .def_readonly("gaussian", &Decomposition::gaussian)
      .def_readonly("sparse", &Decomposition::sparse)
      .def_readonly("components", &Decomposition::components)
      .def_readonly("singular_values", &Decomposition::singular_values)
      .def_readonly("explained_variance_ratio", &Decomposition::explained_variance_ratio)
      .def_readonly("method", &Decomposition::method)
      .def_readonly("iterations_used", &Decomposition::iterations_used)
      .def_readonly("converged", &Decomposition::converged)
      .def_readonly("final_residual", &Decomposition::final_residual)
      .def_readonly("config", &Decomposition::config);

  m.def(
      "decompose",
      [](const Eigen::MatrixXd& data, const std::string& method, const SolverConfig& cfg) {
        return decompose(data, parse_method(method), cfg);
      },
      py::arg("matrix"), py::arg("method") = "exrpca-iter", py::arg("config") = SolverConfig{},
      "method is one of 'pca', 'exrpca-iter', 'exrpca-cvx'.");
  m.def("pca_decompose", py::overload_cast<const Eigen::MatrixXd&, std::size_t>(&pca_decompose), py::arg("matrix"),
        py::arg("rank"));
  m.def("soft_threshold", &soft_threshold, py::arg("x"), py::arg("a"));
  m.def("singular_value_threshold", &singular_value_threshold, py::arg("x"), py::arg("a"));
  m.def("estimate_sigma", &estimate_sigma, py::arg("e"));
  m.def("three_sigma_mask", &three_sigma_mask, py::arg("e"), py::arg("sigma"));
  m.def("components_of", &components_of, py::arg("decomposition"), py::arg("k"));
  m.def("save_decomposition",
        [](const Decomposition& d, const std::filesystem::path& dir) { save_decomposition(d, dir); },
        py::arg("decomposition"), py::arg("directory"));
  m.def("load_decomposition", &load_decomposition, py::arg("directory"), py::arg("with_matrices") = true);
}

void bind_projection(py::module_& m) {
  py::class_<ProjectionMatrix>(m, "ProjectionMatrix")
      .def_property_readonly("matrix", &ProjectionMatrix::matrix)
      .def_property_readonly("basis", &ProjectionMatrix::basis)
      .def("apply", &ProjectionMatrix::apply, py::arg("vector"));

  m.def("build_projection", &build_projection, py::arg("components"));
  m.def("orthonormalize", &orthonormalize, py::arg("columns"));
  m.def("apply_projection", &apply_projection, py::arg("projection"), py::arg("store"));
  m.def(
      "pseudo_sense_distance",
      [](const EmbeddingStore& before, const EmbeddingStore& after, const LabelTuple& pair) {
        return pseudo_sense_distance(before, after, to_label(pair));
      },
      py::arg("before"), py::arg("after"), py::arg("pair"));
}

void bind_eval(py::module_& m) {
  py::class_<Context>(m, "Context")
      .def_readonly("tokens", &Context::tokens)
      .def_readonly("target", &Context::target);

  py::class_<SimilarityPair>(m, "SimilarityPair")
      .def_readonly("word1", &SimilarityPair::word1)
      .def_readonly("word2", &SimilarityPair::word2)
      .def_readonly("context1", &SimilarityPair::context1)
      .def_readonly("context2", &SimilarityPair::context2)
      .def_readonly("gold", &SimilarityPair::gold);

  py::class_<SimilarityDataset>(m, "SimilarityDataset")
      .def_readonly("name", &SimilarityDataset::name)
      .def_readonly("pairs", &SimilarityDataset::pairs)
      .def_readonly("contextual", &SimilarityDataset::contextual)
      .def_readonly("warnings", &SimilarityDataset::warnings)
      .def("__len__", [](const SimilarityDataset& d) { return d.pairs.size(); });

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("dataset", &EvalReport::dataset)
      .def_property_readonly("metric", [](const EvalReport& r) { return std::string(metric_name(r.metric)); })
      .def_readonly("spearman_x100", &EvalReport::spearman_x100)
      .def_readonly("pairs_scored", &EvalReport::pairs_scored)
      .def_readonly("pairs_skipped_oov", &EvalReport::pairs_skipped_oov)
      .def_readonly("context_fallbacks", &EvalReport::context_fallbacks)
      .def_readonly("rank_of_L", &EvalReport::rank_of_L);

  m.def(
      "load_dataset",
      [](const std::filesystem::path& p, const std::string& format, bool lowercase) {
        return load_dataset(p, parse_dataset_format(format), DatasetOptions{lowercase});
      },
      py::arg("path"), py::arg("format"), py::arg("lowercase") = false);
  m.def("write_scws", py::overload_cast<const SimilarityDataset&, const std::filesystem::path&>(&write_scws),
        py::arg("dataset"), py::arg("path"));
  m.def("cosine", &cosine, py::arg("a"), py::arg("b"));
  m.def(
      "avg_sim", [](const EmbeddingStore& s, const std::string& a, const std::string& b) { return avg_sim(s, a, b); },
      py::arg("store"), py::arg("word1"), py::arg("word2"));
  m.def(
      "spearman",
      [](const std::vector<double>& xs, const std::vector<double>& ys) { return spearman(xs, ys); },
      py::arg("xs"), py::arg("ys"), "Rank correlation with average ranks for ties; None when undefined.");
  m.def(
      "average_ranks", [](const std::vector<double>& v) { return average_ranks(v); }, py::arg("values"));
  m.def(
      "evaluate",
      [](const EmbeddingStore& s, const SimilarityDataset& ds, const std::string& metric, std::size_t window) {
        return evaluate(s, ds, EvalOptions{parse_metric(metric), window});
      },
      py::arg("store"), py::arg("dataset"), py::arg("metric") = "avgsim", py::arg("window") = 5);
  m.def(
      "dimension_sweep",
      [](const EmbeddingStore& s, const Decomposition& d, const SimilarityDataset& ds,
         const std::vector<std::size_t>& ks, const std::string& metric, std::size_t window) {
        std::vector<std::pair<std::size_t, double>> out;
        for (const auto& p : dimension_sweep(s, d, ds, ks, EvalOptions{parse_metric(metric), window}))
          out.emplace_back(p.k, p.spearman_x100);
        return out;
      },
      py::arg("store"), py::arg("decomposition"), py::arg("dataset"), py::arg("ks"), py::arg("metric") = "avgsim",
      py::arg("window") = 5);
}

void bind_analysis(py::module_& m) {
  m.def(
      "rank_pairs_by_component",
      [](const DiffMatrix& d, const Eigen::VectorXd& c, std::size_t top_n) {
        std::vector<std::pair<LabelTuple, double>> out;
        for (const auto& p : rank_pairs_by_component(d, c, top_n).pairs) out.emplace_back(to_tuple(p.label), p.cosine);
        return out;
      },
      py::arg("matrix"), py::arg("component"), py::arg("top_n"));
  m.def(
      "sparse_norm_for_pair",
      [](const Decomposition& dec, const DiffMatrix& d, const LabelTuple& pair) {
        return sparse_norm_for_pair(dec, d, to_label(pair));
      },
      py::arg("decomposition"), py::arg("matrix"), py::arg("pair"));
  m.def(
      "nearest_neighbors",
      [](const EmbeddingStore& s, const std::string& word, std::size_t sense_id, std::size_t top_n) {
        std::vector<std::tuple<std::string, std::int64_t, double>> out;
        for (const auto& n : nearest_neighbors(s, word, sense_id, top_n))
          out.emplace_back(n.word, n.original_id, n.cosine);
        return out;
      },
      py::arg("store"), py::arg("word"), py::arg("sense_id"), py::arg("top_n") = 5);
}

void bind_synth(py::module_& m) {
  py::class_<PlantedInstance>(m, "PlantedInstance")
      .def_readonly("matrix", &PlantedInstance::matrix)
      .def_readonly("low_rank", &PlantedInstance::low_rank)
      .def_readonly("sparse", &PlantedInstance::sparse)
      .def_readonly("noise", &PlantedInstance::noise)
      .def_readonly("true_subspace", &PlantedInstance::true_subspace)
      .def_readonly("support", &PlantedInstance::support)
      .def_readonly("sigma", &PlantedInstance::sigma)
      .def_readonly("seed", &PlantedInstance::seed);

  m.def(
      "generate_planted",
      [](std::size_t rows, std::size_t cols, std::size_t rank, double density, double magnitude, double sigma,
         std::uint64_t seed, bool mirrored) {
        PlantedOptions o;
        o.rows = rows;
        o.cols = cols;
        o.rank = rank;
        o.sparse_density = density;
        o.sparse_magnitude = magnitude;
        o.sigma = sigma;
        o.seed = seed;
        o.mirrored = mirrored;
        return generate_planted(o);
      },
      py::arg("rows") = 50, py::arg("cols") = 400, py::arg("rank") = 3, py::arg("density") = 0.01,
      py::arg("magnitude") = 0.1, py::arg("sigma") = 0.01, py::arg("seed") = 0, py::arg("mirrored") = false);

  m.def(
      "generate_toy_store",
      [](std::size_t num_words, std::vector<std::size_t> senses, std::size_t dim,
         std::optional<Eigen::VectorXd> direction, std::uint64_t seed, double noise, double real_fraction) {
        ToyStoreOptions o;
        o.num_words = num_words;
        o.senses_per_word = std::move(senses);
        o.dimension = dim;
        o.pseudo_direction = std::move(direction);
        o.seed = seed;
        o.noise_sigma = noise;
        o.real_sense_fraction = real_fraction;
        auto toy = generate_toy_store(o);
        return py::make_tuple(std::move(toy.store), to_tuples(toy.pseudo_pairs), toy.real_sense_words);
      },
      py::arg("num_words") = 20, py::arg("senses_per_word") = std::vector<std::size_t>{2}, py::arg("dimension") = 10,
      py::arg("pseudo_direction") = py::none(), py::arg("seed") = 0, py::arg("noise_sigma") = 0.0,
      py::arg("real_sense_fraction") = 0.0, "Returns (store, pseudo_pairs, real_sense_words).");

  m.def(
      "generate_contextual_benchmark",
      [](std::size_t num_words, std::size_t dim, std::size_t num_pairs, std::uint64_t seed) {
        BenchmarkOptions o;
        o.num_words = num_words;
        o.dimension = dim;
        o.num_pairs = num_pairs;
        o.seed = seed;
        auto b = generate_contextual_benchmark(o);
        return py::make_tuple(std::move(b.store), std::move(b.dataset), b.pseudo_direction);
      },
      py::arg("num_words") = 60, py::arg("dimension") = 50, py::arg("num_pairs") = 400, py::arg("seed") = 0,
      "Returns (store, dataset, pseudo_direction).");
}

void bind_pipeline(py::module_& m) {
  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config, std::optional<std::filesystem::path> output_dir) {
        auto cfg = load_pipeline_config(config);
        if (output_dir) cfg.output_dir = *output_dir;
        const auto r = run_pipeline(cfg);
        py::dict out;
        out["manifest_path"] = r.manifest_path;
        out["manifest_hash"] = r.manifest_hash;
        out["baseline"] = r.baseline_reports;
        out["projected"] = r.projected_reports;
        return out;
      },
      py::arg("config"), py::arg("output_dir") = py::none(),
      "Run the full pipeline from a JSON config file.");
  m.def("fnv1a_hex", [](const std::string& s) { return fnv1a_hex(s); }, py::arg("data"));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pseudo multi-sense detection and removal for multi-sense word embeddings";
  bind_errors(m);
  bind_store(m);
  bind_matrix(m);
  bind_decompose(m);
  bind_projection(m);
  bind_eval(m);
  bind_analysis(m);
  bind_synth(m);
  bind_pipeline(m);

#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)
#ifdef VERSION_INFO
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
