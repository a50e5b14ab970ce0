// Acceptance gate: one PASS / FAIL / SKIP line per criterion.
//
// Usage: acceptance [--known-failure NAME]...
// A criterion listed with --known-failure still prints FAIL but does not
// turn the exit status nonzero.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "pseudosense/analysis.hpp"
#include "pseudosense/decompose.hpp"
#include "pseudosense/diff_matrix.hpp"
#include "pseudosense/embedding_store.hpp"
#include "pseudosense/eval.hpp"
#include "pseudosense/pipeline.hpp"
#include "pseudosense/projection.hpp"
#include "pseudosense/synth.hpp"
#include "tempdir.hpp"

using namespace pseudosense;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
  Status status = Status::pass;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

Outcome verdict(bool ok, std::string detail) {
  return {ok ? Status::pass : Status::fail, std::move(detail)};
}

// 1. Planted-structure recovery ------------------------------------------------

Outcome planted_iterative() {
  const auto inst = generate_planted(50, 400, 3, 0.01, 0.1, 0.01, 0);
  SolverConfig cfg;
  cfg.target_rank = 3;
  const auto dec = exrpca_iterative(inst.matrix, cfg);
  std::size_t tp = 0, fp = 0, fn = 0;
  for (Eigen::Index j = 0; j < inst.matrix.cols(); ++j) {
    for (Eigen::Index i = 0; i < inst.matrix.rows(); ++i) {
      const bool hit = dec.sparse(i, j) != 0.0;
      tp += hit && inst.support(i, j);
      fp += hit && !inst.support(i, j);
      fn += !hit && inst.support(i, j);
    }
  }
  const double precision = tp + fp ? double(tp) / double(tp + fp) : 1.0;
  const double recall = tp + fn ? double(tp) / double(tp + fn) : 1.0;
  const double angle = oracle::principal_angle_deg(dec.components, inst.true_subspace);
  const bool ok = precision >= 0.95 && recall >= 0.95 && angle <= 5.0;
  return verdict(ok, "iterative precision=" + fmt(precision) + " recall=" + fmt(recall) +
                         " (tp=" + std::to_string(tp) + " fp=" + std::to_string(fp) +
                         " fn=" + std::to_string(fn) + ") angle=" + fmt(angle) + "deg");
}

Outcome planted_convex() {
  const auto inst = generate_planted(50, 400, 3, 0.01, 0.1, 0.01, 0);
  const auto dec = exrpca_convex(inst.matrix, SolverConfig{});
  const VectorXd sv = Eigen::JacobiSVD<MatrixXd>(dec.low_rank).singularValues();
  const auto rank = (sv.array() > 1e-6 * sv(0)).count();
  const bool ok = dec.final_residual < 1e-6 && rank == 3;
  return verdict(ok, "convex residual=" + fmt(dec.final_residual) + " rank=" + std::to_string(rank) +
                         " iterations=" + std::to_string(dec.iterations_used));
}

// 2. Projection algebra ---------------------------------------------------------

Outcome projection_algebra() {
  Rng rng(2024);
  double worst_alpha = 0, worst_fix = 0, worst_idem = 0, worst_linear = 0;
  int linear_trials = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index dim = trial % 2 == 0 ? 2 + static_cast<Eigen::Index>(rng.below(11))
                                            : 2 + static_cast<Eigen::Index>(rng.below(63));
    const Eigen::Index k = 1 + static_cast<Eigen::Index>(rng.below(std::min<std::uint64_t>(8, dim - 1)));
    const MatrixXd frame = oracle::random_frame(rng, dim, k);
    const auto t = build_projection(frame);
    const MatrixXd& tm = t.matrix();
    for (Eigen::Index i = 0; i < k; ++i) worst_alpha = std::max(worst_alpha, (tm * frame.col(i)).norm());
    const VectorXd x = oracle::random_orthogonal_to(rng, frame);
    worst_fix = std::max(worst_fix, (tm * x - x).norm());
    worst_idem = std::max(worst_idem, (tm * tm - tm).norm());
    if (dim <= 12) {
      ++linear_trials;
      worst_linear = std::max(worst_linear, (tm - oracle::linear_system_projection(frame)).cwiseAbs().maxCoeff());
    }
  }
  const bool ok = worst_alpha <= 1e-10 && worst_fix <= 1e-10 && worst_idem <= 1e-10 && worst_linear <= 1e-8 &&
                  linear_trials >= 50;
  return verdict(ok, "max|T a|=" + fmt(worst_alpha) + " max|Tx-x|=" + fmt(worst_fix) + " max|T^2-T|=" +
                         fmt(worst_idem) + " max|T-T_lin|=" + fmt(worst_linear) + " over " +
                         std::to_string(linear_trials) + " small-D trials");
}

// 3. Three-sigma calibration ------------------------------------------------------

Outcome three_sigma_calibration() {
  Rng rng(17);
  const double sigma = 0.5;
  MatrixXd g(1000, 1000);
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = sigma * rng.normal();
  const double known = double(three_sigma_mask(g, sigma).count()) / double(g.size());
  const double estimated = double(three_sigma_mask(g, estimate_sigma(g)).count()) / double(g.size());

  PlantedOptions o;
  o.rows = 200;
  o.cols = 2000;
  o.rank = 5;
  o.sparse_density = 0.02;
  o.sparse_magnitude = 0.2;
  o.sigma = 0.01;
  o.seed = 3;
  const auto inst = generate_planted(o);
  const auto residual = pca_decompose(inst.matrix, 5).gaussian;
  const double heavy = double(three_sigma_mask(residual, estimate_sigma(residual)).count()) /
                       double(residual.size());

  const bool ok = std::abs(known - 0.0027) <= 0.001 && std::abs(estimated - 0.0027) <= 0.001 && heavy > 0.01;
  return verdict(ok, "gaussian masked=" + fmt(100 * known) + "% (estimated sigma: " + fmt(100 * estimated) +
                         "%) heavy-tailed residual masked=" + fmt(100 * heavy) + "%");
}

// 4. Spearman oracle equivalence -----------------------------------------------------

struct SpearmanTally {
  std::size_t compared = 0;
  std::size_t undefined_mismatch = 0;
  double worst = 0;

  void check(const std::vector<double>& xs, const std::vector<double>& ys) {
    ++compared;
    const auto got = spearman(xs, ys);
    const double want = oracle::rank_then_pearson(xs, ys);
    if (std::isnan(want) != !got.has_value()) {
      ++undefined_mismatch;
      return;
    }
    if (got) worst = std::max(worst, std::abs(*got - want));
  }
};

// All lists of length n over {0, ..., base-1}.
std::vector<std::vector<double>> all_lists(int n, int base) {
  std::vector<std::vector<double>> out;
  std::vector<double> cur(static_cast<std::size_t>(n), 0.0);
  for (;;) {
    out.push_back(cur);
    int i = 0;
    while (i < n && cur[static_cast<std::size_t>(i)] == base - 1) cur[static_cast<std::size_t>(i++)] = 0;
    if (i == n) return out;
    cur[static_cast<std::size_t>(i)] += 1;
  }
}

// Every weak ordering of n items, as lists whose value set is {0, ..., m-1}.
std::vector<std::vector<double>> weak_orderings(int n) {
  std::vector<std::vector<double>> out;
  for (auto& v : all_lists(n, n)) {
    std::set<double> seen(v.begin(), v.end());
    if (*seen.rbegin() == double(seen.size() - 1)) out.push_back(std::move(v));
  }
  return out;
}

Outcome spearman_equivalence() {
  SpearmanTally tally;
  for (int n = 2; n <= 6; ++n) {
    const auto lists = all_lists(n, 3);
    for (const auto& xs : lists)
      for (const auto& ys : lists) tally.check(xs, ys);
  }
  for (int n = 2; n <= 5; ++n) {
    const auto lists = weak_orderings(n);
    for (const auto& xs : lists)
      for (const auto& ys : lists) tally.check(xs, ys);
  }
  const std::size_t exhaustive = tally.compared;
  Rng rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(60);
    const std::uint64_t levels = 1 + rng.below(8);
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = static_cast<double>(rng.below(levels)) * 0.5 - 1.0;
      ys[i] = rng.bernoulli(0.3) ? static_cast<double>(rng.below(3)) : rng.normal();
    }
    tally.check(xs, ys);
  }
  const bool ok = tally.worst <= 1e-12 && tally.undefined_mismatch == 0;
  return verdict(ok, std::to_string(exhaustive) + " exhaustive + 1000 random pairs, max diff=" + fmt(tally.worst) +
                         " undefined mismatches=" + std::to_string(tally.undefined_mismatch));
}

// 5. Diff-matrix count and antisymmetry -------------------------------------------------

Outcome diff_matrix_structure() {
  Rng rng(5);
  std::size_t bad_count = 0, missing_twin = 0, columns = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t words = 1 + rng.below(30);
    const std::size_t max_senses = 1 + rng.below(5);
    const auto store = oracle::random_store(rng, words, max_senses, 1 + static_cast<Eigen::Index>(rng.below(8)));
    std::size_t expected = 0;
    for (const auto& w : store.words()) {
      const std::size_t n = store.senses_of(w).size();
      expected += n * (n - 1);
    }
    const auto m = build_diff_matrix(store);
    bad_count += m.cols() != expected || static_cast<std::size_t>(m.data.cols()) != expected;
    columns += m.cols();
    for (std::size_t j = 0; j < m.cols(); ++j) {
      const auto twin = m.find_column(m.labels[j].reversed());
      if (!twin || m.data.col(static_cast<Eigen::Index>(*twin)) != -m.data.col(static_cast<Eigen::Index>(j)))
        ++missing_twin;
    }
  }
  const bool ok = bad_count == 0 && missing_twin == 0;
  return verdict(ok, "500 stores, " + std::to_string(columns) + " columns, count mismatches=" +
                         std::to_string(bad_count) + " missing twins=" + std::to_string(missing_twin));
}

// 6. End-to-end synthetic improvement -----------------------------------------------------

Outcome end_to_end() {
  testutil::TempDir dir;
  const auto bench = generate_contextual_benchmark(BenchmarkOptions{});
  write_embeddings(bench.store, dir / "emb.txt");
  write_scws(bench.dataset, dir / "scws.txt");
  PipelineConfig cfg;
  cfg.embeddings = dir / "emb.txt";
  cfg.output_dir = dir / "out";
  cfg.method = Method::exrpca_iterative;
  cfg.solver.target_rank = 1;
  cfg.projection_k = 1;
  cfg.datasets.push_back({dir / "scws.txt", DatasetFormat::scws, Metric::local_sim});
  const auto r = run_pipeline(cfg);
  const double before = r.baseline_reports.at(0).spearman_x100;
  const double after = r.projected_reports.at(0).spearman_x100;
  return verdict(after >= before + 10.0, "localSim rho*100 " + format_x100(before) + " -> " + format_x100(after));
}

// 7. Released-data reproduction (conditional) ------------------------------------------------

Outcome released_data() {
  const char* emb = std::getenv("PSEUDOSENSE_MSSG_EMBEDDINGS");
  const char* scws = std::getenv("PSEUDOSENSE_SCWS");
  const char* ws353 = std::getenv("PSEUDOSENSE_WS353");
  if (!emb || !scws || !ws353)
    return {Status::skip, "set PSEUDOSENSE_MSSG_EMBEDDINGS, PSEUDOSENSE_SCWS and PSEUDOSENSE_WS353 to run"};

  const auto store = load_embeddings(emb, EmbeddingFormat::mssg);
  const auto scws_ds = load_scws(scws);
  const auto ws_ds = load_ws353(ws353);
  const EvalOptions local{Metric::local_sim, 5};
  const EvalOptions avg{Metric::avg_sim, 5};
  const auto m = build_diff_matrix(store);

  const double base = evaluate(store, scws_ds, local).spearman_x100;

  auto projected = [&](const Decomposition& dec, std::size_t rank) {
    return apply_projection(build_projection(components_of(dec, rank)), store);
  };
  auto solve = [&](Method method, std::size_t rank) {
    SolverConfig cfg;
    cfg.target_rank = rank;
    return decompose(m.data, method, cfg);
  };
  const auto rpca3 = projected(solve(Method::exrpca_iterative, 3), 3);
  const double rpca_scws = evaluate(rpca3, scws_ds, local).spearman_x100;
  const double rpca_ws = evaluate(rpca3, ws_ds, avg).spearman_x100;
  const auto pca5 = solve(Method::pca, 5);
  const double pca_scws = evaluate(projected(pca5, 5), scws_ds, local).spearman_x100;

  // Explained variance of the top three principal components, x100.
  const double published_variance[3] = {12.3, 8.9, 5.8};
  bool variance_ok = true;
  std::string variance_text;
  for (Eigen::Index i = 0; i < 3; ++i) {
    const double v = 100.0 * pca5.explained_variance_ratio(i);
    variance_ok = variance_ok && std::abs(v - published_variance[i]) <= 0.3;
    variance_text += (i ? "," : "") + fmt(v, 3);
  }

  // Sparse-noise norms of sense pair (0, 1) at rank 2: +/-15% of the published
  // values, and an absolute 0.1 for the pair published as 0.
  const auto dec2 = solve(Method::exrpca_iterative, 2);
  auto norm_of = [&](const std::string& w) { return sparse_norm_for_pair(dec2, m, {w, 0, 1}); };
  const double prime = norm_of("prime"), yard = norm_of("yard"), engine = norm_of("engine"), cat = norm_of("cat");
  auto near = [](double got, double want) { return std::abs(got - want) <= 0.15 * want; };
  const bool norms_ok = near(prime, 3.35) && near(yard, 2.75) && near(engine, 0.61) && cat <= 0.1 &&
                        prime >= std::max({yard, engine, cat});

  const bool ok = std::abs(base - 59.8) <= 0.5 && rpca_scws >= 64.4 && std::abs(pca_scws - 65.3) <= 1.0 &&
                  std::abs(rpca_ws - 69.2) <= 0.5 && variance_ok && norms_ok;
  return verdict(ok, "SCWS base=" + format_x100(base) + " exrpca3=" + format_x100(rpca_scws) +
                         " pca5=" + format_x100(pca_scws) + " WS353 exrpca3=" + format_x100(rpca_ws) +
                         " pca variance x100=" + variance_text + " |S| prime=" + fmt(prime, 3) +
                         " yard=" + fmt(yard, 3) + " engine=" + fmt(engine, 3) + " cat=" + fmt(cat, 3));
}

Outcome planted_recovery() {
  auto timed = [](Outcome (*solver)()) {
    const auto start = std::chrono::steady_clock::now();
    auto out = solver();
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (seconds > 30.0) out.status = Status::fail;
    out.detail += " in " + fmt(seconds, 3) + " s";
    return out;
  };
  const auto a = timed(planted_iterative);
  const auto b = timed(planted_convex);
  const bool ok = a.status == Status::pass && b.status == Status::pass;
  return verdict(ok, a.detail + "; " + b.detail);
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> known_failures;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--known-failure" && i + 1 < argc) {
      known_failures.insert(argv[++i]);
    } else {
      std::cerr << "usage: acceptance [--known-failure NAME]...\n";
      return 2;
    }
  }

  // The planted criterion also holds each solver to 30 s on its own.
  const std::vector<Criterion> criteria{
      {"planted-recovery", 60.0, planted_recovery},
      {"projection-algebra", 5.0, projection_algebra},
      {"three-sigma-calibration", 10.0, three_sigma_calibration},
      {"spearman-oracle", 10.0, spearman_equivalence},
      {"diff-matrix-structure", 5.0, diff_matrix_structure},
      {"end-to-end-improvement", 60.0, end_to_end},
      {"released-data-table", 3600.0, released_data},
  };

  int unexpected = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {Status::fail, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.status == Status::pass && seconds > c.budget_seconds) {
      out.status = Status::fail;
      out.detail += " (over the " + fmt(c.budget_seconds) + " s budget)";
    }
    const char* tag = out.status == Status::pass ? "PASS" : out.status == Status::fail ? "FAIL" : "SKIP";
    std::cout << tag << "  " << std::left << std::setw(26) << c.name << std::right << std::fixed
              << std::setprecision(2) << std::setw(8) << seconds << " s  " << std::defaultfloat << out.detail;
    if (out.status == Status::fail && known_failures.count(c.name)) std::cout << "  [known failure]";
    std::cout << '\n' << std::flush;
    if (out.status == Status::fail && !known_failures.count(c.name)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
