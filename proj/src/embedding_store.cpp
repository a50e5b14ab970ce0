#include "pseudosense/embedding_store.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "pseudosense/errors.hpp"

namespace pseudosense {

namespace {

bool same_vector(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.size() == b.size() && (a.array() == b.array()).all();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename Int>
bool parse_int(std::string_view text, Int& value) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

double parse_double(std::string_view text, std::size_t line_no) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw FormatError("invalid number '" + std::string(text) + "'", line_no);
  }
  return value;
}

Eigen::VectorXd parse_vector(std::span<const std::string_view> fields, std::size_t dimension,
                             std::size_t line_no) {
  if (fields.size() != dimension) {
    throw FormatError("dimension mismatch: expected " + std::to_string(dimension) +
                          " values, found " + std::to_string(fields.size()),
                      line_no);
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(dimension));
  for (std::size_t i = 0; i < dimension; ++i) {
    v[static_cast<Eigen::Index>(i)] = parse_double(fields[i], line_no);
  }
  return v;
}

// "word#id" -> (word, id); the split happens at the last '#'.
std::pair<std::string, std::int64_t> parse_sense_key(std::string_view key, std::size_t line_no) {
  const auto hash = key.rfind('#');
  if (hash == std::string_view::npos || hash == 0 || hash + 1 == key.size()) {
    throw FormatError("expected <word>#<sense_id>, found '" + std::string(key) + "'", line_no);
  }
  std::int64_t id = 0;
  if (!parse_int(key.substr(hash + 1), id) || id < 0) {
    throw FormatError("invalid sense id in '" + std::string(key) + "'", line_no);
  }
  return {std::string(key.substr(0, hash)), id};
}

std::pair<std::size_t, std::size_t> parse_header(std::istream& in, std::size_t& line_no) {
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    std::size_t count = 0;
    std::size_t dimension = 0;
    if (fields.size() != 2 || !parse_int(fields[0], count) || !parse_int(fields[1], dimension) ||
        dimension == 0) {
      throw FormatError("malformed header, expected '<count> <dimension>'", line_no);
    }
    return {count, dimension};
  }
  throw FormatError("empty file");
}

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v[i]);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

bool operator==(const SenseVector& a, const SenseVector& b) {
  if (a.word != b.word || a.sense_id != b.sense_id || a.original_id != b.original_id) return false;
  if (!same_vector(a.vector, b.vector)) return false;
  if (a.cluster_center.has_value() != b.cluster_center.has_value()) return false;
  return !a.cluster_center || same_vector(*a.cluster_center, *b.cluster_center);
}

EmbeddingFormat parse_embedding_format(std::string_view name) {
  if (name == "canonical") return EmbeddingFormat::canonical;
  if (name == "mssg") return EmbeddingFormat::mssg;
  throw InvalidArgument("unknown embedding format '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// EmbeddingStore

bool EmbeddingStore::contains(std::string_view word) const {
  return index_.find(std::string(word)) != index_.end();
}

const EmbeddingStore::Range& EmbeddingStore::range_of(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) throw LookupError("unknown word '" + std::string(word) + "'");
  return it->second;
}

std::size_t EmbeddingStore::num_senses(std::string_view word) const {
  return range_of(word).count;
}

std::span<const SenseVector> EmbeddingStore::senses_of(std::string_view word) const {
  const auto& r = range_of(word);
  return std::span<const SenseVector>(senses_).subspan(r.offset, r.count);
}

const SenseVector& EmbeddingStore::sense(std::string_view word, std::size_t sense_id) const {
  const auto& r = range_of(word);
  if (sense_id >= r.count) {
    throw LookupError("sense " + std::to_string(sense_id) + " out of range for '" +
                      std::string(word) + "' (" + std::to_string(r.count) + " senses)");
  }
  return senses_[r.offset + sense_id];
}

const SenseVector& EmbeddingStore::sense_by_original(std::string_view word,
                                                     std::int64_t original_id) const {
  for (const auto& s : senses_of(word)) {
    if (s.original_id == original_id) return s;
  }
  throw LookupError("word '" + std::string(word) + "' has no sense with id " +
                    std::to_string(original_id));
}

const Eigen::VectorXd* EmbeddingStore::global_vector(std::string_view word) const {
  auto it = globals_.find(std::string(word));
  return it == globals_.end() ? nullptr : &it->second;
}

bool EmbeddingStore::has_cluster_centers() const noexcept {
  return std::any_of(senses_.begin(), senses_.end(),
                     [](const SenseVector& s) { return s.cluster_center.has_value(); });
}

EmbeddingStore EmbeddingStore::map_vectors(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& fn) const {
  EmbeddingStore out = *this;
  for (auto& s : out.senses_) {
    s.vector = fn(s.vector);
    if (s.vector.size() != static_cast<Eigen::Index>(dimension_)) {
      throw InvalidArgument("mapped vector changed dimension");
    }
  }
  return out;
}

bool operator==(const EmbeddingStore& a, const EmbeddingStore& b) {
  if (a.dimension_ != b.dimension_ || a.words_ != b.words_ || a.senses_ != b.senses_) return false;
  if (a.globals_.size() != b.globals_.size()) return false;
  for (const auto& [word, v] : a.globals_) {
    auto it = b.globals_.find(word);
    if (it == b.globals_.end() || !same_vector(v, it->second)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// EmbeddingStoreBuilder

EmbeddingStoreBuilder::EmbeddingStoreBuilder(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw InvalidArgument("embedding dimension must be positive");
}

EmbeddingStoreBuilder& EmbeddingStoreBuilder::add_sense(std::string word, std::int64_t original_id,
                                                        Eigen::VectorXd vector,
                                                        std::optional<Eigen::VectorXd> cluster_center) {
  const auto dim = static_cast<Eigen::Index>(dimension_);
  if (word.empty()) throw InvalidArgument("empty word token");
  if (original_id < 0) throw InvalidArgument("negative sense id for '" + word + "'");
  if (vector.size() != dim) {
    throw InvalidArgument("dimension mismatch for '" + word + "': expected " +
                          std::to_string(dimension_) + ", got " + std::to_string(vector.size()));
  }
  if (cluster_center && cluster_center->size() != dim) {
    throw InvalidArgument("cluster center dimension mismatch for '" + word + "'");
  }
  auto [it, inserted] = pending_.try_emplace(word);
  if (inserted) order_.push_back(word);
  for (const auto& s : it->second) {
    if (s.original_id == original_id) {
      throw InvalidArgument("duplicate sense '" + word + "#" + std::to_string(original_id) + "'");
    }
  }
  SenseVector s;
  s.word = std::move(word);
  s.original_id = original_id;
  s.vector = std::move(vector);
  s.cluster_center = std::move(cluster_center);
  it->second.push_back(std::move(s));
  return *this;
}

EmbeddingStoreBuilder& EmbeddingStoreBuilder::set_cluster_center(std::string_view word,
                                                                 std::int64_t original_id,
                                                                 Eigen::VectorXd center) {
  if (center.size() != static_cast<Eigen::Index>(dimension_)) {
    throw InvalidArgument("cluster center dimension mismatch for '" + std::string(word) + "'");
  }
  auto it = pending_.find(std::string(word));
  if (it != pending_.end()) {
    for (auto& s : it->second) {
      if (s.original_id != original_id) continue;
      if (s.cluster_center) {
        throw InvalidArgument("duplicate cluster center for '" + std::string(word) + "#" +
                              std::to_string(original_id) + "'");
      }
      s.cluster_center = std::move(center);
      return *this;
    }
  }
  throw InvalidArgument("cluster center for unknown sense '" + std::string(word) + "#" +
                        std::to_string(original_id) + "'");
}

EmbeddingStoreBuilder& EmbeddingStoreBuilder::set_global_vector(std::string word,
                                                                Eigen::VectorXd vector) {
  if (vector.size() != static_cast<Eigen::Index>(dimension_)) {
    throw InvalidArgument("global vector dimension mismatch for '" + word + "'");
  }
  if (!globals_.emplace(std::move(word), std::move(vector)).second) {
    throw InvalidArgument("duplicate global vector");
  }
  return *this;
}

EmbeddingStore EmbeddingStoreBuilder::build() && {
  EmbeddingStore store(dimension_);
  for (const auto& word : order_) {
    auto& senses = pending_.at(word);
    std::sort(senses.begin(), senses.end(), [](const SenseVector& a, const SenseVector& b) {
      return a.original_id < b.original_id;
    });
    const std::size_t offset = store.senses_.size();
    for (std::size_t i = 0; i < senses.size(); ++i) {
      senses[i].sense_id = i;
      store.senses_.push_back(std::move(senses[i]));
    }
    store.index_.emplace(word, EmbeddingStore::Range{offset, senses.size()});
    store.words_.push_back(word);
  }
  for (auto& [word, v] : globals_) {
    if (!store.index_.count(word)) {
      throw InvalidArgument("global vector for word without senses: '" + word + "'");
    }
    store.globals_.emplace(word, std::move(v));
  }
  pending_.clear();
  order_.clear();
  globals_.clear();
  return store;
}

// ---------------------------------------------------------------------------
// Text formats

EmbeddingStore read_canonical(std::istream& in) {
  std::size_t line_no = 0;
  const auto [count, dimension] = parse_header(in, line_no);
  EmbeddingStoreBuilder builder(dimension);

  enum class Block { senses, clusters, globals } block = Block::senses;
  std::size_t seen = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    if (fields.size() == 1 && fields[0] == "#CLUSTERS") {
      block = Block::clusters;
      continue;
    }
    if (fields.size() == 1 && fields[0] == "#GLOBALS") {
      block = Block::globals;
      continue;
    }
    const auto values = std::span<const std::string_view>(fields).subspan(1);
    try {
      switch (block) {
        case Block::senses: {
          auto [word, id] = parse_sense_key(fields[0], line_no);
          builder.add_sense(std::move(word), id, parse_vector(values, dimension, line_no));
          ++seen;
          break;
        }
        case Block::clusters: {
          auto [word, id] = parse_sense_key(fields[0], line_no);
          builder.set_cluster_center(word, id, parse_vector(values, dimension, line_no));
          break;
        }
        case Block::globals:
          builder.set_global_vector(std::string(fields[0]), parse_vector(values, dimension, line_no));
          break;
      }
    } catch (const InvalidArgument& e) {
      throw FormatError(e.what(), line_no);
    }
  }
  if (seen != count) {
    throw FormatError("malformed header: declares " + std::to_string(count) +
                      " sense vectors, file has " + std::to_string(seen));
  }
  try {
    return std::move(builder).build();
  } catch (const InvalidArgument& e) {
    throw FormatError(e.what());
  }
}

EmbeddingStore read_mssg(std::istream& in) {
  std::size_t line_no = 0;
  const auto [num_words, dimension] = parse_header(in, line_no);
  EmbeddingStoreBuilder builder(dimension);

  std::string line;
  auto next_fields = [&](const char* what) {
    while (std::getline(in, line)) {
      ++line_no;
      auto fields = split_fields(line);
      if (!fields.empty()) return fields;
    }
    throw FormatError(std::string("unexpected end of file, expected ") + what, line_no);
  };

  for (std::size_t w = 0; w < num_words; ++w) {
    const auto record = next_fields("a '<word> <n_senses>' record");
    std::size_t n_senses = 0;
    if (record.size() != 2 || !parse_int(record[1], n_senses) || n_senses == 0) {
      throw FormatError("malformed word record, expected '<word> <n_senses>'", line_no);
    }
    std::string word(record[0]);
    try {
      auto global = parse_vector(next_fields("a global vector"), dimension, line_no);
      for (std::size_t s = 0; s < n_senses; ++s) {
        auto vec = parse_vector(next_fields("a sense vector"), dimension, line_no);
        auto center = parse_vector(next_fields("a cluster center"), dimension, line_no);
        builder.add_sense(word, static_cast<std::int64_t>(s), std::move(vec), std::move(center));
      }
      builder.set_global_vector(word, std::move(global));
    } catch (const InvalidArgument& e) {
      throw FormatError(e.what(), line_no);
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!split_fields(line).empty()) {
      throw FormatError("trailing content after " + std::to_string(num_words) + " word records",
                        line_no);
    }
  }
  return std::move(builder).build();
}

EmbeddingStore load_embeddings(const std::filesystem::path& path, EmbeddingFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return format == EmbeddingFormat::mssg ? read_mssg(in) : read_canonical(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

void write_canonical(const EmbeddingStore& store, std::ostream& out) {
  out << store.size() << ' ' << store.dimension() << '\n';
  for (const auto& s : store.senses()) {
    out << s.word << '#' << s.original_id;
    write_vector(out, s.vector);
    out << '\n';
  }
  if (store.has_cluster_centers()) {
    out << "#CLUSTERS\n";
    for (const auto& s : store.senses()) {
      if (!s.cluster_center) continue;
      out << s.word << '#' << s.original_id;
      write_vector(out, *s.cluster_center);
      out << '\n';
    }
  }
  if (store.has_global_vectors()) {
    out << "#GLOBALS\n";
    for (const auto& word : store.words()) {
      if (const auto* g = store.global_vector(word)) {
        out << word;
        write_vector(out, *g);
        out << '\n';
      }
    }
  }
}

void write_embeddings(const EmbeddingStore& store, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  write_canonical(store, out);
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

void write_mssg(const EmbeddingStore& store, std::ostream& out) {
  const Eigen::VectorXd zeros = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(store.dimension()));
  out << store.words().size() << ' ' << store.dimension() << '\n';
  for (const auto& word : store.words()) {
    const auto senses = store.senses_of(word);
    out << word << ' ' << senses.size() << '\n';
    const auto* g = store.global_vector(word);
    write_vector(out, g ? *g : zeros);
    out << '\n';
    for (const auto& s : senses) {
      write_vector(out, s.vector);
      out << '\n';
      write_vector(out, s.cluster_center ? *s.cluster_center : zeros);
      out << '\n';
    }
  }
}

void write_mssg(const EmbeddingStore& store, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  write_mssg(store, out);
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pseudosense
