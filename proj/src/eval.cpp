#include "pseudosense/eval.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "pseudosense/errors.hpp"
#include "pseudosense/projection.hpp"

namespace pseudosense {

namespace {

std::string lowered(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_on(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::optional<double> parse_real(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::ifstream open_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return in;
}

}  // namespace

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "ws353") return DatasetFormat::ws353;
  if (name == "scws") return DatasetFormat::scws;
  throw InvalidArgument("unknown dataset format '" + std::string(name) + "'");
}

Metric parse_metric(std::string_view name) {
  const auto n = lowered(name);
  if (n == "avgsim") return Metric::avg_sim;
  if (n == "localsim") return Metric::local_sim;
  throw InvalidArgument("unknown metric '" + std::string(name) + "'");
}

std::string_view metric_name(Metric metric) {
  return metric == Metric::avg_sim ? "avgSim" : "localSim";
}

// ---------------------------------------------------------------------------
// Dataset loading

SimilarityDataset read_ws353(std::istream& in, std::string name, const DatasetOptions& opts) {
  SimilarityDataset ds;
  ds.name = std::move(name);
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto content = trim(line);
    if (content.empty()) continue;
    const char sep = content.find('\t') != std::string_view::npos ? '\t' : ',';
    const auto fields = split_on(content, sep);
    const auto score = fields.size() >= 3 ? parse_real(fields[2]) : std::nullopt;
    if (!score) {
      if (first) {
        first = false;
        continue;  // header
      }
      throw FormatError("malformed WS-353 line, expected 'word1,word2,score'", line_no);
    }
    first = false;
    SimilarityPair p;
    p.word1 = std::string(trim(fields[0]));
    p.word2 = std::string(trim(fields[1]));
    if (p.word1.empty() || p.word2.empty()) throw FormatError("empty word in WS-353 line", line_no);
    if (opts.lowercase) {
      p.word1 = lowered(p.word1);
      p.word2 = lowered(p.word2);
    }
    p.gold = *score;
    ds.pairs.push_back(std::move(p));
  }
  if (ds.pairs.size() != 353) {
    ds.warnings.push_back("WS-353 file has " + std::to_string(ds.pairs.size()) +
                          " pairs (expected 353)");
  }
  return ds;
}

Context parse_marked_context(std::string_view text, bool lowercase) {
  std::string spaced;
  spaced.reserve(text.size() + 8);
  for (std::size_t i = 0; i < text.size();) {
    if (text.substr(i, 3) == "<b>") {
      spaced += " <b> ";
      i += 3;
    } else if (text.substr(i, 4) == "</b>") {
      spaced += " </b> ";
      i += 4;
    } else {
      spaced += text[i++];
    }
  }

  Context ctx;
  std::istringstream words(spaced);
  std::string tok;
  bool inside = false;
  bool found = false;
  while (words >> tok) {
    if (tok == "<b>") {
      if (found) throw InvalidArgument("context has more than one <b> marker");
      inside = true;
      continue;
    }
    if (tok == "</b>") {
      inside = false;
      continue;
    }
    if (inside && !found) {
      ctx.target = ctx.tokens.size();
      found = true;
    }
    ctx.tokens.push_back(lowercase ? lowered(tok) : tok);
  }
  if (!found) throw InvalidArgument("context has no <b>...</b> target marker");
  return ctx;
}

SimilarityDataset read_scws(std::istream& in, std::string name, const DatasetOptions& opts) {
  SimilarityDataset ds;
  ds.name = std::move(name);
  ds.contextual = true;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_on(line, '\t');
    if (fields.size() < 8) {
      throw FormatError("malformed SCWS line, expected at least 8 tab-separated fields", line_no);
    }
    const auto score = parse_real(fields[7]);
    if (!score) throw FormatError("malformed SCWS mean rating", line_no);
    SimilarityPair p;
    p.word1 = std::string(trim(fields[1]));
    p.word2 = std::string(trim(fields[3]));
    if (opts.lowercase) {
      p.word1 = lowered(p.word1);
      p.word2 = lowered(p.word2);
    }
    try {
      p.context1 = parse_marked_context(fields[5], opts.lowercase);
      p.context2 = parse_marked_context(fields[6], opts.lowercase);
    } catch (const InvalidArgument& e) {
      throw FormatError(std::string("SCWS context: ") + e.what(), line_no);
    }
    p.gold = *score;
    ds.pairs.push_back(std::move(p));
  }
  if (ds.pairs.size() != 2003) {
    ds.warnings.push_back("SCWS file has " + std::to_string(ds.pairs.size()) +
                          " pairs (expected 2003)");
  }
  return ds;
}

SimilarityDataset load_ws353(const std::filesystem::path& path, const DatasetOptions& opts) {
  auto in = open_dataset(path);
  try {
    return read_ws353(in, path.filename().string(), opts);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

SimilarityDataset load_scws(const std::filesystem::path& path, const DatasetOptions& opts) {
  auto in = open_dataset(path);
  try {
    return read_scws(in, path.filename().string(), opts);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

SimilarityDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                               const DatasetOptions& opts) {
  return format == DatasetFormat::scws ? load_scws(path, opts) : load_ws353(path, opts);
}

// ---------------------------------------------------------------------------
// Similarity metrics

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double denom = a.norm() * b.norm();
  return denom > 0.0 ? a.dot(b) / denom : 0.0;
}

double avg_sim(const EmbeddingStore& store, std::string_view w1, std::string_view w2) {
  const auto s1 = store.senses_of(w1);
  const auto s2 = store.senses_of(w2);
  double total = 0.0;
  for (const auto& a : s1) {
    for (const auto& b : s2) total += cosine(a.vector, b.vector);
  }
  return total / static_cast<double>(s1.size() * s2.size());
}

std::optional<Eigen::VectorXd> context_representation(const EmbeddingStore& store,
                                                      const Context& ctx, std::size_t window) {
  if (ctx.tokens.empty()) return std::nullopt;
  const std::size_t lo = ctx.target > window ? ctx.target - window : 0;
  const std::size_t hi = std::min(ctx.tokens.size() - 1, ctx.target + window);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(store.dimension()));
  std::size_t used = 0;
  for (std::size_t i = lo; i <= hi; ++i) {
    if (i == ctx.target) continue;
    const auto& tok = ctx.tokens[i];
    if (const auto* g = store.global_vector(tok)) {
      sum += *g;
      ++used;
    } else if (store.contains(tok)) {
      sum += store.sense(tok, 0).vector;
      ++used;
    }
  }
  if (used == 0) return std::nullopt;
  return Eigen::VectorXd(sum / static_cast<double>(used));
}

std::size_t select_sense(const EmbeddingStore& store, std::string_view word,
                         const Eigen::VectorXd& context) {
  const auto senses = store.senses_of(word);
  std::size_t best = 0;
  double best_cos = -std::numeric_limits<double>::infinity();
  for (const auto& s : senses) {
    const double c = cosine(context, s.cluster_center ? *s.cluster_center : s.vector);
    if (c > best_cos) {
      best_cos = c;
      best = s.sense_id;
    }
  }
  return best;
}

LocalSimResult local_sim_scored(const EmbeddingStore& store, std::string_view w1,
                                const Context& ctx1, std::string_view w2, const Context& ctx2,
                                std::size_t window) {
  if (!store.contains(w1)) throw LookupError("unknown word '" + std::string(w1) + "'");
  if (!store.contains(w2)) throw LookupError("unknown word '" + std::string(w2) + "'");
  const auto rep1 = context_representation(store, ctx1, window);
  const auto rep2 = context_representation(store, ctx2, window);
  if (!rep1 || !rep2) return {avg_sim(store, w1, w2), true};
  const auto& v1 = store.sense(w1, select_sense(store, w1, *rep1)).vector;
  const auto& v2 = store.sense(w2, select_sense(store, w2, *rep2)).vector;
  return {cosine(v1, v2), false};
}

double local_sim(const EmbeddingStore& store, std::string_view w1, const Context& ctx1,
                 std::string_view w2, const Context& ctx2, std::size_t window) {
  return local_sim_scored(store, w1, ctx1, w2, ctx2, window).score;
}

// ---------------------------------------------------------------------------
// Rank correlation

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    // positions i..j (0-based) share ranks i+1..j+1
    const double shared = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = shared;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw InvalidArgument("spearman: length mismatch (" + std::to_string(xs.size()) + " vs " +
                          std::to_string(ys.size()) + ")");
  }
  if (xs.size() < 2) throw InvalidArgument("spearman needs at least two observations");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = static_cast<double>(rx.size());
  const double mean = (n + 1.0) / 2.0;  // average ranks always sum to n(n+1)/2
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Evaluation

EvalReport evaluate(const EmbeddingStore& store, const SimilarityDataset& ds,
                    const EvalOptions& opts) {
  if (opts.metric == Metric::local_sim && !ds.contextual) {
    throw InvalidArgument("localSim needs a contextual dataset; '" + ds.name + "' has no contexts");
  }
  EvalReport report;
  report.dataset = ds.name;
  report.metric = opts.metric;

  std::vector<double> model;
  std::vector<double> gold;
  model.reserve(ds.pairs.size());
  gold.reserve(ds.pairs.size());
  for (const auto& p : ds.pairs) {
    if (!store.contains(p.word1) || !store.contains(p.word2)) {
      ++report.pairs_skipped_oov;
      continue;
    }
    double score = 0.0;
    if (opts.metric == Metric::avg_sim) {
      score = avg_sim(store, p.word1, p.word2);
    } else {
      const auto r = local_sim_scored(store, p.word1, *p.context1, p.word2, *p.context2, opts.window);
      score = r.score;
      report.context_fallbacks += r.context_fallback ? 1 : 0;
    }
    model.push_back(score);
    gold.push_back(p.gold);
  }
  report.pairs_scored = model.size();
  if (model.empty()) throw Error("every pair of '" + ds.name + "' is out of vocabulary");
  if (model.size() < 2) throw Error("fewer than two scorable pairs in '" + ds.name + "'");
  const auto rho = spearman(model, gold);
  if (!rho) throw Error("Spearman correlation undefined on '" + ds.name + "' (constant scores)");
  report.spearman_x100 = 100.0 * *rho;
  return report;
}

std::vector<SweepPoint> dimension_sweep(const EmbeddingStore& store, const Decomposition& dec,
                                        const SimilarityDataset& ds,
                                        std::span<const std::size_t> ks, const EvalOptions& opts) {
  std::vector<SweepPoint> curve;
  curve.reserve(ks.size());
  const bool reorthonormalize = dec.method == Method::exrpca_convex;
  for (const std::size_t k : ks) {
    if (k == 0) {
      curve.push_back({0, evaluate(store, ds, opts).spearman_x100});
      continue;
    }
    Eigen::MatrixXd basis = components_of(dec, k);
    if (reorthonormalize) basis = orthonormalize(basis);
    const auto projected = apply_projection(build_projection(basis), store);
    auto report = evaluate(projected, ds, opts);
    curve.push_back({k, report.spearman_x100});
  }
  return curve;
}

void write_scws(const SimilarityDataset& ds, std::ostream& out) {
  auto marked = [](const Context& c) {
    std::string s;
    for (std::size_t i = 0; i < c.tokens.size(); ++i) {
      if (i) s += ' ';
      s += i == c.target ? "<b>" + c.tokens[i] + "</b>" : c.tokens[i];
    }
    return s;
  };
  std::size_t id = 0;
  for (const auto& p : ds.pairs) {
    if (!p.context1 || !p.context2) throw InvalidArgument("pair without contexts cannot be written as SCWS");
    out << ++id << '\t' << p.word1 << "\tn\t" << p.word2 << "\tn\t" << marked(*p.context1) << '\t'
        << marked(*p.context2) << '\t' << format_double(p.gold) << '\n';
  }
}

void write_scws(const SimilarityDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_scws(ds, out);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::string format_x100(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", value);
  return buf;
}

void write_eval_report_tsv(std::ostream& out, std::span<const EvalReport> reports) {
  out << "dataset\tmetric\tspearman_x100\tpairs_scored\tpairs_skipped_oov\tcontext_fallbacks\trank_of_L\n";
  for (const auto& r : reports) {
    out << r.dataset << '\t' << metric_name(r.metric) << '\t' << format_x100(r.spearman_x100) << '\t'
        << r.pairs_scored << '\t' << r.pairs_skipped_oov << '\t' << r.context_fallbacks << '\t'
        << (r.rank_of_L ? std::to_string(*r.rank_of_L) : "N/A") << '\n';
  }
}

std::string eval_report_json(std::span<const EvalReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["dataset"] = r.dataset;
    j["metric"] = metric_name(r.metric);
    j["spearman_x100"] = r.spearman_x100;
    j["pairs_scored"] = r.pairs_scored;
    j["pairs_skipped_oov"] = r.pairs_skipped_oov;
    j["context_fallbacks"] = r.context_fallbacks;
    j["rank_of_L"] = r.rank_of_L ? nlohmann::ordered_json(*r.rank_of_L) : nlohmann::ordered_json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

}  // namespace pseudosense
