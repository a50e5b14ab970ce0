#include "pseudosense/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "pseudosense/diff_matrix.hpp"
#include "pseudosense/matrix_io.hpp"
#include "pseudosense/projection.hpp"

namespace pseudosense {

namespace fs = std::filesystem;

namespace {

std::string_view embedding_format_name(EmbeddingFormat f) {
  return f == EmbeddingFormat::mssg ? "mssg" : "canonical";
}

std::string_view dataset_format_name(DatasetFormat f) {
  return f == DatasetFormat::scws ? "scws" : "ws353";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

fs::path partial_of(const fs::path& target) {
  return target.parent_path() / (target.filename().string() + ".partial");
}

void promote(const fs::path& partial, const fs::path& target) {
  fs::remove_all(target);
  fs::rename(partial, target);
}

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

void PipelineConfig::validate() const {
  if (embeddings.empty()) throw InvalidArgument("no embeddings path given");
  if (!fs::exists(embeddings)) throw InvalidArgument("embeddings '" + embeddings.string() + "' not found");
  for (const auto& ds : datasets) {
    if (!fs::exists(ds.path)) throw InvalidArgument("dataset '" + ds.path.string() + "' not found");
  }
  if (output_dir.empty()) throw InvalidArgument("no output directory given");
  if (projection_k && *projection_k == 0) throw InvalidArgument("projection k must be positive");
  solver.validate();
}

void merge_pipeline_config(PipelineConfig& cfg, const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  try {
    if (j.contains("embeddings")) cfg.embeddings = j["embeddings"].get<std::string>();
    if (j.contains("embedding_format")) {
      cfg.embedding_format = parse_embedding_format(j["embedding_format"].get<std::string>());
    }
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("method")) cfg.method = parse_method(j["method"].get<std::string>());
    if (j.contains("target_rank")) cfg.solver.target_rank = j["target_rank"].get<std::size_t>();
    if (j.contains("lambda1")) cfg.solver.lambda1 = j["lambda1"].get<double>();
    if (j.contains("lambda2")) cfg.solver.lambda2 = j["lambda2"].get<double>();
    if (j.contains("max_iterations")) cfg.solver.max_iterations = j["max_iterations"].get<std::size_t>();
    if (j.contains("tolerance")) cfg.solver.residual_tolerance = j["tolerance"].get<double>();
    if (j.contains("rho")) cfg.solver.rho = j["rho"].get<double>();
    if (j.contains("epsilon")) cfg.solver.epsilon_mu = j["epsilon"].get<double>();
    if (j.contains("seed")) cfg.solver.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("k")) cfg.projection_k = j["k"].get<std::size_t>();
    if (j.contains("window")) cfg.window = j["window"].get<std::size_t>();
    if (j.contains("lowercase")) cfg.lowercase = j["lowercase"].get<bool>();
    if (j.contains("datasets")) {
      cfg.datasets.clear();
      for (const auto& d : j["datasets"]) {
        DatasetSpec spec;
        spec.path = d.at("path").get<std::string>();
        spec.format = parse_dataset_format(d.at("format").get<std::string>());
        spec.metric = d.contains("metric") ? parse_metric(d["metric"].get<std::string>())
                      : spec.format == DatasetFormat::scws ? Metric::local_sim
                                                           : Metric::avg_sim;
        cfg.datasets.push_back(std::move(spec));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  PipelineConfig cfg;
  merge_pipeline_config(cfg, path);
  return cfg;
}

std::string canonical_config_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["embeddings"] = cfg.embeddings.generic_string();
  j["embedding_format"] = embedding_format_name(cfg.embedding_format);
  auto& ds = j["datasets"] = nlohmann::ordered_json::array();
  for (const auto& d : cfg.datasets) {
    ds.push_back({{"path", d.path.generic_string()},
                  {"format", dataset_format_name(d.format)},
                  {"metric", metric_name(d.metric)}});
  }
  j["method"] = method_name(cfg.method);
  j["target_rank"] = cfg.solver.target_rank;
  j["lambda1"] = cfg.solver.lambda1 ? nlohmann::ordered_json(*cfg.solver.lambda1) : nlohmann::ordered_json(nullptr);
  j["lambda2"] = cfg.solver.lambda2 ? nlohmann::ordered_json(*cfg.solver.lambda2) : nlohmann::ordered_json(nullptr);
  j["max_iterations"] = cfg.solver.max_iterations;
  j["tolerance"] = cfg.solver.residual_tolerance;
  j["rho"] = cfg.solver.rho;
  j["epsilon"] = cfg.solver.epsilon_mu;
  j["seed"] = cfg.solver.seed;
  j["k"] = cfg.projection_k ? nlohmann::ordered_json(*cfg.projection_k) : nlohmann::ordered_json(nullptr);
  j["window"] = cfg.window;
  j["lowercase"] = cfg.lowercase;
  return j.dump();
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string digest_path(const fs::path& path) {
  if (!fs::is_directory(path)) return fnv1a_hex(read_file(path));
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(path)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::string combined;
  for (const auto& f : files) {
    combined += fs::relative(f, path).generic_string();
    combined += '\0';
    combined += digest_path(f);
    combined += '\n';
  }
  return fnv1a_hex(combined);
}

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  run_stage("config", [&] {
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    return 0;
  });

  PipelineResult result;
  const fs::path& out = cfg.output_dir;
  auto record = [&](std::string name, const fs::path& path) {
    result.artifacts.push_back({std::move(name), path, digest_path(path)});
  };

  const auto store = run_stage("load", [&] { return load_embeddings(cfg.embeddings, cfg.embedding_format); });

  const auto matrix = run_stage("build-matrix", [&] {
    auto m = build_diff_matrix(store);
    if (m.degenerate()) throw InvalidArgument("no multi-sense words; the difference matrix is empty");
    const fs::path target = out / "diff_matrix.bin";
    write_diff_matrix(partial_of(target), m);
    promote(partial_of(target), target);
    record("diff_matrix", target);
    return m;
  });

  const auto dec = run_stage("decompose", [&] {
    auto d = decompose(matrix.data, cfg.method, cfg.solver);
    const fs::path target = out / "decomposition";
    fs::remove_all(partial_of(target));
    save_decomposition(d, partial_of(target), matrix.labels);
    promote(partial_of(target), target);
    record("decomposition", target);
    return d;
  });

  const std::size_t k = cfg.projection_k.value_or(
      cfg.method == Method::exrpca_convex ? dec.num_components() : cfg.solver.target_rank);

  const auto projected = run_stage("project", [&] {
    Eigen::MatrixXd basis = components_of(dec, k);
    if (cfg.method == Method::exrpca_convex) basis = orthonormalize(basis);
    const auto t = build_projection(basis);
    const fs::path t_target = out / "projection.bin";
    write_matrix_dump(partial_of(t_target), t.matrix());
    promote(partial_of(t_target), t_target);
    record("projection", t_target);

    auto p = apply_projection(t, store);
    const fs::path e_target = out / "projected_embeddings.txt";
    write_embeddings(p, partial_of(e_target));
    promote(partial_of(e_target), e_target);
    record("projected_embeddings", e_target);
    return p;
  });

  if (!cfg.datasets.empty()) {
    run_stage("evaluate", [&] {
      for (const auto& spec : cfg.datasets) {
        const auto ds = load_dataset(spec.path, spec.format, {cfg.lowercase});
        const EvalOptions opts{spec.metric, cfg.window};
        result.baseline_reports.push_back(evaluate(store, ds, opts));
        auto projected_report = evaluate(projected, ds, opts);
        projected_report.rank_of_L = k;
        result.projected_reports.push_back(std::move(projected_report));
      }
      nlohmann::ordered_json j;
      j["baseline"] = nlohmann::ordered_json::parse(eval_report_json(result.baseline_reports));
      j["projected"] = nlohmann::ordered_json::parse(eval_report_json(result.projected_reports));
      std::ostringstream tsv;
      std::vector<EvalReport> all = result.baseline_reports;
      all.insert(all.end(), result.projected_reports.begin(), result.projected_reports.end());
      write_eval_report_tsv(tsv, all);

      const fs::path target = out / "eval";
      const fs::path partial = partial_of(target);
      fs::remove_all(partial);
      fs::create_directories(partial);
      write_text(partial / "report.json", j.dump(2) + "\n");
      write_text(partial / "report.tsv", tsv.str());
      promote(partial, target);
      record("eval_reports", target);
      return 0;
    });
  }

  run_stage("manifest", [&] {
    const std::string config_json = canonical_config_json(cfg);
    nlohmann::ordered_json m;
    m["tool"] = "pseudosense";
    m["version"] = kVersion;
    m["eigen_version"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                         std::to_string(EIGEN_MAJOR_VERSION) + "." +
                         std::to_string(EIGEN_MINOR_VERSION);
    m["config"] = nlohmann::ordered_json::parse(config_json);
    m["config_hash"] = fnv1a_hex(config_json);
    m["projection_k"] = k;
    m["iterations_used"] = dec.iterations_used;
    m["converged"] = dec.converged;
    auto& arts = m["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& a : result.artifacts) {
      arts.push_back({{"name", a.name},
                      {"path", fs::relative(a.path, out).generic_string()},
                      {"fnv1a64", a.digest}});
    }
    const std::string text = m.dump(2) + "\n";
    result.manifest_hash = fnv1a_hex(text);
    result.manifest_path = out / "manifest.json";
    write_text(partial_of(result.manifest_path), text);
    promote(partial_of(result.manifest_path), result.manifest_path);
    return 0;
  });
  return result;
}

}  // namespace pseudosense
