// pseudosense command-line tool.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

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

namespace fs = std::filesystem;
using namespace pseudosense;

namespace {

fs::path default_output_dir() {
  const char* env = std::getenv(kOutputDirEnv);
  return env && *env ? fs::path(env) : fs::path(".");
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// "word:a:b" with original sense ids; the word itself may contain ':'.
PairLabel parse_pair(const std::string& text) {
  const auto second = text.rfind(':');
  const auto first = second == std::string::npos || second == 0 ? std::string::npos : text.rfind(':', second - 1);
  if (first == std::string::npos || first == 0) throw InvalidArgument("pair '" + text + "' is not word:a:b");
  try {
    return {text.substr(0, first), std::stoll(text.substr(first + 1, second - first - 1)),
            std::stoll(text.substr(second + 1))};
  } catch (const std::logic_error&) {
    throw InvalidArgument("pair '" + text + "' has non-integer sense ids");
  }
}

// "word:s" with an original sense id.
std::pair<std::string, std::int64_t> parse_sense(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0) throw InvalidArgument("sense '" + text + "' is not word:s");
  try {
    return {text.substr(0, colon), std::stoll(text.substr(colon + 1))};
  } catch (const std::logic_error&) {
    throw InvalidArgument("sense '" + text + "' has a non-integer id");
  }
}

struct SolverFlags {
  std::string method = "exrpca-iter";
  SolverConfig cfg;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  CLI::Option* method_opt = nullptr;
  CLI::Option* rank_opt = nullptr;
  CLI::Option* lambda1_opt = nullptr;
  CLI::Option* lambda2_opt = nullptr;
  CLI::Option* iterations_opt = nullptr;
  CLI::Option* tolerance_opt = nullptr;
  CLI::Option* rho_opt = nullptr;
  CLI::Option* epsilon_opt = nullptr;
  CLI::Option* seed_opt = nullptr;

  void attach(CLI::App* app) {
    method_opt = app->add_option("--method", method, "pca | exrpca-iter | exrpca-cvx")
                     ->check(CLI::IsMember({"pca", "exrpca-iter", "exrpca-cvx"}));
    rank_opt = app->add_option("--rank,-d", cfg.target_rank, "target rank d of L");
    lambda1_opt = app->add_option("--lambda1", lambda1, "Gaussian-term weight (convex solver)");
    lambda2_opt = app->add_option("--lambda2", lambda2, "sparse-term weight (convex solver)");
    iterations_opt = app->add_option("--max-iterations", cfg.max_iterations);
    tolerance_opt = app->add_option("--tolerance", cfg.residual_tolerance, "relative residual stop");
    rho_opt = app->add_option("--rho", cfg.rho, "penalty growth factor");
    epsilon_opt = app->add_option("--epsilon", cfg.epsilon_mu, "penalty update threshold");
    seed_opt = app->add_option("--seed", cfg.seed);
  }

  // Copies explicitly given flags over `into`.
  void overlay(Method& m, SolverConfig& into) const {
    if (method_opt->count()) m = parse_method(method);
    if (rank_opt->count()) into.target_rank = cfg.target_rank;
    if (lambda1_opt->count()) into.lambda1 = lambda1;
    if (lambda2_opt->count()) into.lambda2 = lambda2;
    if (iterations_opt->count()) into.max_iterations = cfg.max_iterations;
    if (tolerance_opt->count()) into.residual_tolerance = cfg.residual_tolerance;
    if (rho_opt->count()) into.rho = cfg.rho;
    if (epsilon_opt->count()) into.epsilon_mu = cfg.epsilon_mu;
    if (seed_opt->count()) into.seed = cfg.seed;
  }
};

struct EmbeddingFlags {
  std::string path;
  std::string format = "canonical";

  void attach(CLI::App* app, bool required = true) {
    auto* opt = app->add_option("--embeddings,-e", path, "embedding file");
    if (required) opt->required();
    app->add_option("--embedding-format", format, "canonical | mssg")->check(CLI::IsMember({"canonical", "mssg"}));
  }
  EmbeddingStore load() const { return load_embeddings(path, parse_embedding_format(format)); }
};

struct DatasetFlags {
  std::string path;
  std::string format = "scws";
  std::string metric;
  std::size_t window = 5;
  bool lowercase = false;

  void attach(CLI::App* app) {
    app->add_option("--dataset", path, "similarity dataset")->required();
    app->add_option("--format", format, "ws353 | scws")->check(CLI::IsMember({"ws353", "scws"}));
    app->add_option("--metric", metric, "avgsim | localsim (default: localsim for scws, avgsim for ws353)")
        ->check(CLI::IsMember({"avgsim", "localsim"}));
    app->add_option("--window", window, "context window half-width");
    app->add_flag("--lowercase", lowercase, "lowercase dataset tokens");
  }
  SimilarityDataset load() const {
    return load_dataset(path, parse_dataset_format(format), DatasetOptions{lowercase});
  }
  EvalOptions options() const {
    const Metric m = !metric.empty()    ? parse_metric(metric)
                     : format == "scws" ? Metric::local_sim
                                        : Metric::avg_sim;
    return {m, window};
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Detect and remove pseudo multi-sense directions from multi-sense word embeddings"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  std::string output_dir = default_output_dir().string();
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--output,-o", output_dir, std::string("output directory (default: $") + kOutputDirEnv + " or .)");
  };

  // build-matrix
  auto* build = app.add_subcommand("build-matrix", "build the sense-difference matrix");
  EmbeddingFlags build_emb;
  build_emb.attach(build);
  add_output(build);

  // decompose
  auto* dec_cmd = app.add_subcommand("decompose", "decompose a difference matrix into L + E + S");
  std::string dec_matrix;
  SolverFlags dec_flags;
  dec_cmd->add_option("--matrix,-m", dec_matrix, "difference matrix dump (default: <output>/diff_matrix.bin)");
  dec_flags.attach(dec_cmd);
  add_output(dec_cmd);

  // project
  auto* proj = app.add_subcommand("project", "project embeddings onto the complement of k components");
  EmbeddingFlags proj_emb;
  std::string proj_components;
  std::size_t proj_k = 1;
  proj_emb.attach(proj);
  proj->add_option("--components,-c", proj_components, "decomposition directory")->required();
  proj->add_option("--k,-k", proj_k, "number of components to remove")->required();
  add_output(proj);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Spearman correlation against a similarity dataset");
  EmbeddingFlags eval_emb;
  DatasetFlags eval_ds;
  std::string eval_json;
  eval_emb.attach(eval_cmd);
  eval_ds.attach(eval_cmd);
  eval_cmd->add_option("--json", eval_json, "also write the report as JSON");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "inspect components, sparse noise and neighbours");
  std::string an_matrix, an_components, an_json;
  EmbeddingFlags an_emb;
  std::size_t an_top_pairs = 0, an_top_n = 5;
  std::vector<std::string> an_noise, an_neighbors;
  bool an_variance = false;
  analyze->add_option("--matrix,-m", an_matrix, "difference matrix dump (default: <output>/diff_matrix.bin)");
  analyze->add_option("--components,-c", an_components, "decomposition directory (default: <output>/decomposition)");
  an_emb.attach(analyze, false);
  auto* top_opt = analyze->add_option("--top-pairs", an_top_pairs, "top pairs per component by |cos|");
  auto* noise_opt = analyze->add_option("--noise", an_noise, "sparse-noise norm for word:a:b pairs");
  auto* nb_opt = analyze->add_option("--neighbors", an_neighbors, "nearest senses of word:s");
  auto* var_opt = analyze->add_flag("--variance", an_variance, "explained variance per component");
  analyze->add_option("--top-n", an_top_n, "neighbours / pairs shown per entry");
  analyze->add_option("--json", an_json, "also write the report as JSON");
  add_output(analyze);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "score as a function of the number of removed components");
  EmbeddingFlags sw_emb;
  DatasetFlags sw_ds;
  std::string sw_components;
  std::vector<std::size_t> sw_ks;
  sw_emb.attach(sweep);
  sw_ds.attach(sweep);
  sweep->add_option("--components,-c", sw_components, "decomposition directory")->required();
  sweep->add_option("--ks", sw_ks, "values of k (default: 0 .. available components)")->delimiter(',');

  // synth
  auto* synth = app.add_subcommand("synth", "generate synthetic fixtures");
  synth->require_subcommand(1);
  auto* planted = synth->add_subcommand("planted", "low-rank + sparse + Gaussian matrix with ground truth");
  PlantedOptions po;
  planted->add_option("--rows", po.rows);
  planted->add_option("--cols", po.cols);
  planted->add_option("--rank", po.rank);
  planted->add_option("--density", po.sparse_density);
  planted->add_option("--magnitude", po.sparse_magnitude);
  planted->add_option("--sigma", po.sigma);
  planted->add_option("--seed", po.seed);
  planted->add_flag("--mirrored", po.mirrored, "columns in negated pairs, like a difference matrix");
  add_output(planted);

  auto* store_cmd = synth->add_subcommand("store", "toy embedding store with a planted pseudo direction");
  ToyStoreOptions so;
  std::string so_out;
  store_cmd->add_option("--words", so.num_words);
  store_cmd->add_option("--senses", so.senses_per_word, "sense counts, cycled over words")->delimiter(',');
  store_cmd->add_option("--dim", so.dimension);
  store_cmd->add_option("--seed", so.seed);
  store_cmd->add_option("--noise", so.noise_sigma);
  store_cmd->add_option("--offset-scale", so.offset_scale);
  store_cmd->add_option("--real-fraction", so.real_sense_fraction);
  add_output(store_cmd);

  auto* bench_cmd = synth->add_subcommand("benchmark", "toy store plus a contextual similarity dataset");
  BenchmarkOptions bo;
  bench_cmd->add_option("--words", bo.num_words);
  bench_cmd->add_option("--senses", bo.senses_per_word);
  bench_cmd->add_option("--dim", bo.dimension);
  bench_cmd->add_option("--topics", bo.num_topics);
  bench_cmd->add_option("--pairs", bo.num_pairs);
  bench_cmd->add_option("--pseudo-scale", bo.pseudo_scale);
  bench_cmd->add_option("--noise", bo.noise_sigma);
  bench_cmd->add_option("--seed", bo.seed);
  add_output(bench_cmd);

  // run
  auto* run = app.add_subcommand("run", "full pipeline: matrix, decomposition, projection, evaluation");
  std::string run_config;
  EmbeddingFlags run_emb;
  SolverFlags run_flags;
  std::vector<std::string> run_scws, run_ws353;
  std::size_t run_k = 0, run_window = 5;
  run->add_option("--config", run_config, "JSON config file; flags override its keys");
  run_emb.attach(run, false);
  run_flags.attach(run);
  auto* run_k_opt = run->add_option("--k,-k", run_k, "components to remove (default: rank)");
  auto* run_window_opt = run->add_option("--window", run_window);
  auto* run_scws_opt = run->add_option("--scws", run_scws, "SCWS dataset (localSim)");
  auto* run_ws_opt = run->add_option("--ws353", run_ws353, "WS-353 dataset (avgSim)");
  auto* run_out_opt = run->add_option("--output,-o", output_dir);

  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const fs::path out = output_dir;

    if (build->parsed()) {
      const auto m = build_diff_matrix(build_emb.load());
      fs::create_directories(out);
      write_diff_matrix(out / "diff_matrix.bin", m);
      std::cout << "wrote " << (out / "diff_matrix.bin").string() << ": " << m.data.rows() << " x " << m.cols()
                << (m.degenerate() ? " (degenerate: no multi-sense words)" : "") << '\n';
      return 0;
    }

    if (dec_cmd->parsed()) {
      const fs::path matrix_path = dec_matrix.empty() ? out / "diff_matrix.bin" : fs::path(dec_matrix);
      const auto m = read_diff_matrix(matrix_path);
      Method method = Method::exrpca_iterative;
      SolverConfig cfg;
      dec_flags.overlay(method, cfg);
      const auto d = decompose(m.data, method, cfg);
      save_decomposition(d, out / "decomposition", m.labels);
      std::cout << method_name(method) << ": " << d.num_components() << " components, " << d.iterations_used
                << " iterations, residual " << d.final_residual << (d.converged ? "" : " (not converged)") << '\n';
      return 0;
    }

    if (proj->parsed()) {
      const auto d = load_decomposition(proj_components, false);
      const auto t = build_projection(components_of(d, proj_k));
      const auto projected = apply_projection(t, proj_emb.load());
      fs::create_directories(out);
      write_matrix_dump(out / "projection.bin", t.matrix());
      write_embeddings(projected, out / "projected_embeddings.txt");
      std::cout << "removed " << proj_k << " of " << d.num_components() << " components; wrote "
                << (out / "projected_embeddings.txt").string() << '\n';
      return 0;
    }

    if (eval_cmd->parsed()) {
      const auto store = eval_emb.load();
      const auto ds = eval_ds.load();
      for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
      const std::vector<EvalReport> reports{evaluate(store, ds, eval_ds.options())};
      write_eval_report_tsv(std::cout, reports);
      if (!eval_json.empty()) write_text(eval_json, eval_report_json(reports) + "\n");
      return 0;
    }

    if (analyze->parsed()) {
      if (!top_opt->count() && !noise_opt->count() && !nb_opt->count() && !var_opt->count()) {
        throw InvalidArgument("choose at least one of --top-pairs, --noise, --neighbors, --variance");
      }
      const fs::path matrix_path = an_matrix.empty() ? out / "diff_matrix.bin" : fs::path(an_matrix);
      const fs::path dec_dir = an_components.empty() ? out / "decomposition" : fs::path(an_components);
      nlohmann::ordered_json report = nlohmann::ordered_json::object();
      std::optional<EmbeddingStore> store;
      if (!an_emb.path.empty()) store = an_emb.load();
      auto need_store = [&]() -> const EmbeddingStore& {
        if (!store) throw InvalidArgument("--embeddings is required for this analysis");
        return *store;
      };

      if (top_opt->count() || var_opt->count() || noise_opt->count()) {
        const auto m = read_diff_matrix(matrix_path);
        const auto d = load_decomposition(dec_dir, noise_opt->count() > 0);
        if (top_opt->count()) {
          std::cout << "component\trank\tpair\tcosine\n";
          auto arr = nlohmann::ordered_json::array();
          for (Eigen::Index j = 0; j < d.components.cols(); ++j) {
            const auto ranking = rank_pairs_by_component(m, d.components.col(j), an_top_pairs);
            std::size_t rank = 0;
            for (const auto& p : ranking.pairs) {
              std::cout << j << '\t' << ++rank << '\t' << to_string(p.label) << '\t' << fixed6(p.cosine)
                        << '\n';
              arr.push_back({{"component", j}, {"rank", rank}, {"pair", to_string(p.label)}, {"cosine", p.cosine}});
            }
            std::cout << "# component " << j << ": " << render_grouped_pairs(ranking.pairs) << '\n';
          }
          report["top_pairs"] = std::move(arr);
        }
        if (var_opt->count()) {
          const auto reports = explained_variance_report(d, m, an_top_n);
          write_variance_tsv(std::cout, reports);
          report["variance"] = nlohmann::ordered_json::parse(variance_json(reports));
        }
        if (noise_opt->count()) {
          std::vector<NoiseIndicatorReport> reports;
          for (const auto& text : an_noise) {
            reports.push_back(noise_indicator(d, m, need_store(), parse_pair(text), an_top_n));
          }
          write_noise_tsv(std::cout, reports);
          report["noise"] = nlohmann::ordered_json::parse(noise_json(reports));
        }
      }
      if (nb_opt->count()) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& text : an_neighbors) {
          const auto [word, original] = parse_sense(text);
          const auto& s = need_store().sense_by_original(word, original);
          const auto neighbors = nearest_neighbors(*store, word, s.sense_id, an_top_n);
          std::cout << "# " << text << '\n';
          write_neighbors_tsv(std::cout, neighbors);
          arr.push_back({{"sense", text}, {"neighbors", nlohmann::ordered_json::parse(neighbors_json(neighbors))}});
        }
        report["neighbors"] = std::move(arr);
      }
      if (!an_json.empty()) write_text(an_json, report.dump(2) + "\n");
      return 0;
    }

    if (sweep->parsed()) {
      const auto store = sw_emb.load();
      const auto d = load_decomposition(sw_components, false);
      const auto ds = sw_ds.load();
      if (sw_ks.empty()) {
        for (std::size_t k = 0; k <= d.num_components(); ++k) sw_ks.push_back(k);
      }
      const auto curve = dimension_sweep(store, d, ds, sw_ks, sw_ds.options());
      std::cout << "k\tspearman_x100\n";
      for (const auto& p : curve) std::cout << p.k << '\t' << format_x100(p.spearman_x100) << '\n';
      return 0;
    }

    if (planted->parsed()) {
      const auto inst = generate_planted(po);
      fs::create_directories(out);
      write_matrix_dump(out / "matrix.bin", inst.matrix);
      write_matrix_dump(out / "low_rank.bin", inst.low_rank);
      write_matrix_dump(out / "sparse.bin", inst.sparse);
      write_matrix_dump(out / "noise.bin", inst.noise);
      write_matrix_dump(out / "subspace.bin", inst.true_subspace);
      std::cout << "planted " << po.rows << " x " << po.cols << ", rank " << po.rank << ", " << inst.support_size()
                << " sparse entries -> " << out.string() << '\n';
      return 0;
    }

    if (store_cmd->parsed()) {
      const auto toy = generate_toy_store(so);
      fs::create_directories(out);
      write_embeddings(toy.store, out / "embeddings.txt");
      std::ostringstream pairs;
      for (const auto& p : toy.pseudo_pairs) pairs << to_string(p) << '\n';
      write_text(out / "pseudo_pairs.txt", pairs.str());
      std::cout << "store with " << toy.store.words().size() << " words, " << toy.store.size() << " senses -> "
                << out.string() << '\n';
      return 0;
    }

    if (bench_cmd->parsed()) {
      const auto bench = generate_contextual_benchmark(bo);
      fs::create_directories(out);
      write_embeddings(bench.store, out / "embeddings.txt");
      write_scws(bench.dataset, out / "scws.txt");
      std::cout << "benchmark with " << bench.dataset.pairs.size() << " pairs -> " << out.string() << '\n';
      return 0;
    }

    if (run->parsed()) {
      PipelineConfig cfg;
      try {
        if (!run_config.empty()) merge_pipeline_config(cfg, run_config);
        if (!run_emb.path.empty()) {
          cfg.embeddings = run_emb.path;
          cfg.embedding_format = parse_embedding_format(run_emb.format);
        }
        run_flags.overlay(cfg.method, cfg.solver);
        if (run_k_opt->count()) cfg.projection_k = run_k;
        if (run_window_opt->count()) cfg.window = run_window;
        if (run_scws_opt->count() || run_ws_opt->count()) {
          cfg.datasets.clear();
          for (const auto& p : run_scws) cfg.datasets.push_back({p, DatasetFormat::scws, Metric::local_sim});
          for (const auto& p : run_ws353) cfg.datasets.push_back({p, DatasetFormat::ws353, Metric::avg_sim});
        }
        if (run_out_opt->count() || cfg.output_dir.empty()) cfg.output_dir = output_dir;
      } catch (const StageError&) {
        throw;
      } catch (const std::exception& e) {
        throw StageError("config", e.what());
      }
      const auto result = run_pipeline(cfg);
      std::cout << "# baseline\n";
      write_eval_report_tsv(std::cout, result.baseline_reports);
      std::cout << "# projected\n";
      write_eval_report_tsv(std::cout, result.projected_reports);
      std::cout << "# manifest " << result.manifest_path.string() << ' ' << result.manifest_hash << '\n';
      return 0;
    }
  } catch (const StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: [" << command << "] " << e.what() << '\n';
    return 1;
  }
  return 0;
}
