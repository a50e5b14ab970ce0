#include "pseudosense/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <tuple>

#include <json.hpp>

#include "pseudosense/errors.hpp"
#include "pseudosense/eval.hpp"

namespace pseudosense {

namespace {

bool ranks_before(const RankedPair& a, const RankedPair& b) {
  if (a.cosine != b.cosine) return a.cosine > b.cosine;
  return a.label < b.label;
}

bool neighbor_before(const Neighbor& a, const Neighbor& b) {
  if (a.cosine != b.cosine) return a.cosine > b.cosine;
  return std::tie(a.word, a.original_id) < std::tie(b.word, b.original_id);
}

std::string fixed6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

nlohmann::ordered_json label_json(const PairLabel& l) {
  return {{"word", l.word}, {"sense_a", l.sense_a}, {"sense_b", l.sense_b}};
}

nlohmann::ordered_json neighbor_json(const Neighbor& n) {
  return {{"word", n.word}, {"sense_id", n.original_id}, {"cosine", n.cosine}};
}

std::string join_neighbors(std::span<const Neighbor> ns) {
  std::string out;
  for (const auto& n : ns) {
    if (!out.empty()) out += ", ";
    out += n.word + "#" + std::to_string(n.original_id);
  }
  return out;
}

}  // namespace

PairRanking rank_pairs_by_component(const DiffMatrix& m, const Eigen::VectorXd& component,
                                    std::size_t top_n) {
  if (top_n == 0) throw InvalidArgument("top_n must be at least 1");
  if (component.size() != m.data.rows()) throw InvalidArgument("component dimension mismatch");
  if (std::abs(component.norm() - 1.0) > 1e-6) throw InvalidArgument("component must have unit norm");

  PairRanking ranking;
  // unordered pair -> best orientation
  std::map<std::tuple<std::string, std::int64_t, std::int64_t>, RankedPair> best;
  for (Eigen::Index j = 0; j < m.data.cols(); ++j) {
    const double norm = m.data.col(j).norm();
    if (norm == 0.0) {
      ++ranking.skipped_zero_norm;
      continue;
    }
    RankedPair candidate{m.labels[static_cast<std::size_t>(j)], m.data.col(j).dot(component) / norm};
    const auto& l = candidate.label;
    auto key = std::make_tuple(l.word, std::min(l.sense_a, l.sense_b), std::max(l.sense_a, l.sense_b));
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(std::move(key), std::move(candidate));
    } else if (ranks_before(candidate, it->second)) {
      it->second = std::move(candidate);
    }
  }

  ranking.pairs.reserve(best.size());
  for (auto& [key, rp] : best) ranking.pairs.push_back(std::move(rp));
  const std::size_t keep = std::min(top_n, ranking.pairs.size());
  std::partial_sort(ranking.pairs.begin(), ranking.pairs.begin() + static_cast<std::ptrdiff_t>(keep),
                    ranking.pairs.end(), ranks_before);
  ranking.pairs.resize(keep);
  return ranking;
}

std::string render_grouped_pairs(std::span<const RankedPair> pairs) {
  std::vector<std::pair<std::string, std::string>> groups;
  for (const auto& p : pairs) {
    const std::string ids = std::to_string(p.label.sense_a) + "," + std::to_string(p.label.sense_b);
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == p.label.word; });
    if (it == groups.end()) {
      groups.emplace_back(p.label.word, ids);
    } else {
      it->second += "/" + ids;
    }
  }
  std::string out;
  for (const auto& [word, ids] : groups) {
    if (!out.empty()) out += ", ";
    out += word + "_{" + ids + "}";
  }
  return out;
}

double sparse_norm_for_pair(const Decomposition& dec, const DiffMatrix& m, const PairLabel& pair) {
  if (dec.sparse.rows() != m.data.rows() || dec.sparse.cols() != m.data.cols()) {
    throw InvalidArgument("decomposition was not computed on this difference matrix");
  }
  const auto col = m.find_column(pair);
  if (!col) throw LookupError("no column labeled " + to_string(pair));
  return dec.sparse.col(static_cast<Eigen::Index>(*col)).norm();
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingStore& store, std::string_view word,
                                        std::size_t sense_id, std::size_t top_n) {
  if (top_n == 0) throw InvalidArgument("top_n must be at least 1");
  const auto& query = store.sense(word, sense_id);
  std::vector<Neighbor> all;
  all.reserve(store.size());
  for (const auto& s : store.senses()) {
    if (s.word == query.word) continue;
    all.push_back({s.word, s.sense_id, s.original_id, cosine(query.vector, s.vector)});
  }
  const std::size_t keep = std::min(top_n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(),
                    neighbor_before);
  all.resize(keep);
  return all;
}

std::vector<ComponentReport> explained_variance_report(const Decomposition& dec,
                                                       const DiffMatrix& m, std::size_t top_n) {
  std::vector<ComponentReport> reports;
  for (std::size_t i = 0; i < dec.num_components(); ++i) {
    ComponentReport r;
    r.component_index = i;
    r.explained_variance_ratio = dec.explained_variance_ratio[static_cast<Eigen::Index>(i)];
    r.top_pairs = rank_pairs_by_component(m, dec.components.col(static_cast<Eigen::Index>(i)), top_n).pairs;
    double sum = 0.0;
    for (const auto& p : r.top_pairs) sum += p.cosine;
    r.avg_cos_top = r.top_pairs.empty() ? 0.0 : sum / static_cast<double>(r.top_pairs.size());
    reports.push_back(std::move(r));
  }
  return reports;
}

NoiseIndicatorReport noise_indicator(const Decomposition& dec, const DiffMatrix& m,
                                     const EmbeddingStore& store, const PairLabel& pair,
                                     std::size_t top_n) {
  NoiseIndicatorReport r;
  r.pair = pair;
  r.s_norm = sparse_norm_for_pair(dec, m, pair);
  r.neighbors_a = nearest_neighbors(store, pair.word,
                                    store.sense_by_original(pair.word, pair.sense_a).sense_id, top_n);
  r.neighbors_b = nearest_neighbors(store, pair.word,
                                    store.sense_by_original(pair.word, pair.sense_b).sense_id, top_n);
  return r;
}

void write_variance_tsv(std::ostream& out, std::span<const ComponentReport> reports) {
  out << "component\texplained_variance_x100\tavg_cos\tpairs\tannotation\n";
  double sum_ratio = 0.0;
  double sum_cos = 0.0;
  for (const auto& r : reports) {
    out << '#' << (r.component_index + 1) << '\t' << fixed6(100.0 * r.explained_variance_ratio)
        << '\t' << fixed6(r.avg_cos_top) << '\t' << render_grouped_pairs(r.top_pairs) << '\t'
        << r.annotation << '\n';
    sum_ratio += r.explained_variance_ratio;
    sum_cos += r.avg_cos_top;
  }
  out << "sum\t" << fixed6(100.0 * sum_ratio) << '\t' << fixed6(sum_cos) << "\t\t\n";
}

void write_noise_tsv(std::ostream& out, std::span<const NoiseIndicatorReport> reports) {
  out << "word\tsense_a\tsense_b\ts_norm\tneighbors_a\tneighbors_b\n";
  for (const auto& r : reports) {
    out << r.pair.word << '\t' << r.pair.sense_a << '\t' << r.pair.sense_b << '\t'
        << fixed6(r.s_norm) << '\t' << join_neighbors(r.neighbors_a) << '\t'
        << join_neighbors(r.neighbors_b) << '\n';
  }
}

void write_neighbors_tsv(std::ostream& out, std::span<const Neighbor> neighbors) {
  out << "rank\tword\tsense_id\tcosine\n";
  for (std::size_t i = 0; i < neighbors.size(); ++i) {
    out << (i + 1) << '\t' << neighbors[i].word << '\t' << neighbors[i].original_id << '\t'
        << fixed6(neighbors[i].cosine) << '\n';
  }
}

std::string variance_json(std::span<const ComponentReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j;
    j["component"] = r.component_index;
    j["explained_variance_ratio"] = r.explained_variance_ratio;
    j["avg_cos"] = r.avg_cos_top;
    auto& pairs = j["top_pairs"] = nlohmann::ordered_json::array();
    for (const auto& p : r.top_pairs) {
      auto entry = label_json(p.label);
      entry["cosine"] = p.cosine;
      pairs.push_back(std::move(entry));
    }
    j["annotation"] = r.annotation;
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

std::string noise_json(std::span<const NoiseIndicatorReport> reports) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json j = label_json(r.pair);
    j["s_norm"] = r.s_norm;
    auto& a = j["neighbors_a"] = nlohmann::ordered_json::array();
    for (const auto& n : r.neighbors_a) a.push_back(neighbor_json(n));
    auto& b = j["neighbors_b"] = nlohmann::ordered_json::array();
    for (const auto& n : r.neighbors_b) b.push_back(neighbor_json(n));
    arr.push_back(std::move(j));
  }
  return arr.dump(2);
}

std::string neighbors_json(std::span<const Neighbor> neighbors) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& n : neighbors) arr.push_back(neighbor_json(n));
  return arr.dump(2);
}

}  // namespace pseudosense
