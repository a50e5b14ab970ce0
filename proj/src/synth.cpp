#include "pseudosense/synth.hpp"

#include <cstdio>

#include "pseudosense/errors.hpp"
#include "pseudosense/rng.hpp"

namespace pseudosense {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd gaussian_matrix(Rng& rng, Index rows, Index cols, double scale) {
  MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = scale * rng.normal();
  }
  return m;
}

VectorXd gaussian_vector(Rng& rng, Index n, double scale) {
  VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

MatrixXd random_orthonormal(Rng& rng, Index rows, Index cols) {
  const MatrixXd g = gaussian_matrix(rng, rows, cols, 1.0);
  Eigen::HouseholderQR<MatrixXd> qr(g);
  return qr.householderQ() * MatrixXd::Identity(rows, cols);
}

std::string word_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "w%04zu", i);
  return buf;
}

}  // namespace

PlantedInstance generate_planted(const PlantedOptions& opts) {
  if (opts.rows == 0 || opts.cols == 0) throw InvalidArgument("planted matrix must be non-empty");
  if (opts.rank >= std::min(opts.rows, opts.cols)) {
    throw InvalidArgument("planted rank must be below min(D, N)");
  }
  if (!(opts.sparse_density >= 0.0 && opts.sparse_density < 1.0)) {
    throw InvalidArgument("sparse density must lie in [0, 1)");
  }
  if (!(opts.sparse_magnitude > 0.0)) throw InvalidArgument("sparse magnitude must be positive");
  if (!(opts.sigma >= 0.0)) throw InvalidArgument("sigma must be non-negative");
  if (opts.mirrored && opts.cols % 2 != 0) {
    throw InvalidArgument("mirrored instances need an even column count");
  }

  const auto rows = static_cast<Index>(opts.rows);
  const auto cols = static_cast<Index>(opts.cols);
  const auto rank = static_cast<Index>(opts.rank);
  const Index drawn = opts.mirrored ? cols / 2 : cols;
  Rng rng(opts.seed);

  PlantedInstance inst;
  inst.sigma = opts.sigma;
  inst.seed = opts.seed;
  inst.true_subspace = rank > 0 ? random_orthonormal(rng, rows, rank) : MatrixXd(rows, 0);
  const MatrixXd coeffs = gaussian_matrix(rng, rank, drawn, opts.coefficient_scale);
  const MatrixXd low = inst.true_subspace * coeffs;

  MatrixXd sparse = MatrixXd::Zero(rows, drawn);
  BoolMatrix support = BoolMatrix::Constant(rows, drawn, false);
  for (Index j = 0; j < drawn; ++j) {
    for (Index i = 0; i < rows; ++i) {
      if (rng.bernoulli(opts.sparse_density)) {
        support(i, j) = true;
        sparse(i, j) = rng.bernoulli(0.5) ? opts.sparse_magnitude : -opts.sparse_magnitude;
      }
    }
  }
  const MatrixXd noise = gaussian_matrix(rng, rows, drawn, opts.sigma);

  if (!opts.mirrored) {
    inst.low_rank = low;
    inst.sparse = sparse;
    inst.noise = noise;
    inst.support = support;
  } else {
    inst.low_rank.resize(rows, cols);
    inst.sparse.resize(rows, cols);
    inst.noise.resize(rows, cols);
    inst.support.resize(rows, cols);
    for (Index j = 0; j < drawn; ++j) {
      inst.low_rank.col(2 * j) = low.col(j);
      inst.low_rank.col(2 * j + 1) = -low.col(j);
      inst.sparse.col(2 * j) = sparse.col(j);
      inst.sparse.col(2 * j + 1) = -sparse.col(j);
      inst.noise.col(2 * j) = noise.col(j);
      inst.noise.col(2 * j + 1) = -noise.col(j);
      inst.support.col(2 * j) = support.col(j);
      inst.support.col(2 * j + 1) = support.col(j);
    }
  }
  inst.matrix = inst.low_rank + inst.sparse + inst.noise;
  return inst;
}

PlantedInstance generate_planted(std::size_t rows, std::size_t cols, std::size_t rank,
                                 double sparse_density, double sparse_magnitude, double sigma,
                                 std::uint64_t seed) {
  PlantedOptions opts;
  opts.rows = rows;
  opts.cols = cols;
  opts.rank = rank;
  opts.sparse_density = sparse_density;
  opts.sparse_magnitude = sparse_magnitude;
  opts.sigma = sigma;
  opts.seed = seed;
  return generate_planted(opts);
}

ToyStore generate_toy_store(const ToyStoreOptions& opts) {
  if (opts.num_words == 0) throw InvalidArgument("toy store needs at least one word");
  if (opts.dimension == 0) throw InvalidArgument("toy store dimension must be positive");
  if (opts.senses_per_word.empty()) throw InvalidArgument("senses_per_word must be non-empty");
  for (const auto n : opts.senses_per_word) {
    if (n == 0) throw InvalidArgument("every word needs at least one sense");
  }
  if (!(opts.noise_sigma >= 0.0)) throw InvalidArgument("noise sigma must be non-negative");
  if (!(opts.real_sense_fraction >= 0.0 && opts.real_sense_fraction <= 1.0)) {
    throw InvalidArgument("real_sense_fraction must lie in [0, 1]");
  }
  const auto dim = static_cast<Index>(opts.dimension);
  VectorXd direction;
  if (opts.pseudo_direction) {
    if (opts.pseudo_direction->size() != dim) {
      throw InvalidArgument("pseudo direction has the wrong dimension");
    }
    const double norm = opts.pseudo_direction->norm();
    if (!(norm > 0.0)) throw InvalidArgument("pseudo direction must be non-zero");
    direction = *opts.pseudo_direction / norm;
  }

  Rng rng(opts.seed);
  ToyStore out;
  EmbeddingStoreBuilder builder(opts.dimension);
  for (std::size_t w = 0; w < opts.num_words; ++w) {
    const std::string word = word_name(w);
    const std::size_t n = opts.senses_per_word[w % opts.senses_per_word.size()];
    const VectorXd base = gaussian_vector(rng, dim, 1.0);
    const bool real = n > 1 && rng.uniform() < opts.real_sense_fraction;
    const bool pseudo = opts.pseudo_direction.has_value() && !real;
    if (real) out.real_sense_words.push_back(word);
    for (std::size_t s = 0; s < n; ++s) {
      VectorXd v = base;
      if (pseudo) {
        v += opts.offset_scale * rng.normal() * direction;
      } else {
        v += gaussian_vector(rng, dim, opts.offset_scale);
      }
      if (opts.noise_sigma > 0.0) v += gaussian_vector(rng, dim, opts.noise_sigma);
      builder.add_sense(word, static_cast<std::int64_t>(s), std::move(v));
    }
    if (pseudo) {
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          out.pseudo_pairs.push_back(
              {word, static_cast<std::int64_t>(a), static_cast<std::int64_t>(b)});
        }
      }
    }
  }
  out.store = std::move(builder).build();
  return out;
}

ContextualBenchmark generate_contextual_benchmark(const BenchmarkOptions& opts) {
  if (opts.num_words < 2 || opts.senses_per_word == 0 || opts.dimension < 2 ||
      opts.num_topics == 0 || opts.num_pairs < 2) {
    throw InvalidArgument("invalid benchmark options");
  }
  const auto dim = static_cast<Index>(opts.dimension);
  Rng rng(opts.seed);

  ContextualBenchmark bench;
  bench.pseudo_direction = gaussian_vector(rng, dim, 1.0).normalized();
  const VectorXd& dir = bench.pseudo_direction;
  auto without_direction = [&dir](VectorXd v) -> VectorXd { return v - dir.dot(v) * dir; };

  std::vector<VectorXd> topics;
  for (std::size_t t = 0; t < opts.num_topics; ++t) topics.push_back(gaussian_vector(rng, dim, 1.0));

  std::vector<VectorXd> meanings;
  EmbeddingStoreBuilder builder(opts.dimension);
  for (std::size_t w = 0; w < opts.num_words; ++w) {
    meanings.push_back(
        without_direction(topics[w % opts.num_topics] + gaussian_vector(rng, dim, 0.5)));
    const std::string word = word_name(w);
    for (std::size_t s = 0; s < opts.senses_per_word; ++s) {
      VectorXd v = meanings.back() + opts.pseudo_scale * rng.normal() * dir +
                   gaussian_vector(rng, dim, opts.noise_sigma);
      VectorXd center = gaussian_vector(rng, dim, 1.0);
      const std::string marker = "ctx:" + word + ":" + std::to_string(s);
      builder.add_sense(marker, 0, center);
      builder.set_global_vector(marker, center);
      builder.add_sense(word, static_cast<std::int64_t>(s), std::move(v), std::move(center));
    }
  }
  bench.store = std::move(builder).build();

  auto& ds = bench.dataset;
  ds.name = "synthetic-contextual";
  ds.contextual = true;
  for (std::size_t p = 0; p < opts.num_pairs; ++p) {
    const std::size_t w1 = rng.below(opts.num_words);
    std::size_t w2 = w1;
    if (rng.bernoulli(0.5)) {
      // same topic partner
      const std::size_t per_topic = (opts.num_words + opts.num_topics - 1) / opts.num_topics;
      w2 = (w1 % opts.num_topics) + opts.num_topics * rng.below(per_topic);
      if (w2 >= opts.num_words || w2 == w1) w2 = rng.below(opts.num_words);
    } else {
      w2 = rng.below(opts.num_words);
    }
    if (w2 == w1) w2 = (w1 + 1) % opts.num_words;
    const std::size_t s1 = rng.below(opts.senses_per_word);
    const std::size_t s2 = rng.below(opts.senses_per_word);

    SimilarityPair pair;
    pair.word1 = word_name(w1);
    pair.word2 = word_name(w2);
    pair.context1 = Context{{"ctx:" + pair.word1 + ":" + std::to_string(s1), pair.word1}, 1};
    pair.context2 = Context{{"ctx:" + pair.word2 + ":" + std::to_string(s2), pair.word2}, 1};
    pair.gold = cosine(meanings[w1], meanings[w2]);
    ds.pairs.push_back(std::move(pair));
  }
  return bench;
}

}  // namespace pseudosense
