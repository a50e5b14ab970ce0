#include <doctest.h>

#include "oracles.hpp"
#include "pseudosense/errors.hpp"
#include "pseudosense/synth.hpp"

using namespace pseudosense;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("rng: documented algorithm") {
  Rng a(5489);
  std::mt19937_64 reference(5489);
  CHECK(a.next() == reference());
  Rng u(1);
  std::mt19937_64 ru(1);
  CHECK(u.uniform() == static_cast<double>(ru() >> 11) * 0x1.0p-53);
  Rng r(9);
  for (int i = 0; i < 1000; ++i) {
    const double x = r.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(r.below(7) < 7u);
  }
  // the very first value of the documented generator, pinned for portability checks
  CHECK(Rng(0).next() == 2947667278772165694ULL);
}

TEST_CASE("planted: density 0, sigma 0, rank 1 is exactly rank 1") {
  const auto inst = generate_planted(10, 30, 1, 0.0, 1.0, 0.0, 3);
  const VectorXd sv = Eigen::JacobiSVD<MatrixXd>(inst.matrix).singularValues();
  CHECK(sv(1) <= 1e-12 * sv(0));
  CHECK(inst.support_size() == 0);
  CHECK(inst.sparse.isZero(0.0));
  CHECK(inst.noise.isZero(0.0));
}

TEST_CASE("planted: same seed gives bitwise-identical instances") {
  const auto a = generate_planted(20, 50, 2, 0.05, 0.5, 0.01, 77);
  const auto b = generate_planted(20, 50, 2, 0.05, 0.5, 0.01, 77);
  CHECK(a.matrix == b.matrix);
  CHECK((a.support == b.support).all());
  CHECK(a.true_subspace == b.true_subspace);
  const auto c = generate_planted(20, 50, 2, 0.05, 0.5, 0.01, 78);
  CHECK(c.matrix != a.matrix);
}

TEST_CASE("planted: parts add up and the support matches the sparse part") {
  const auto inst = generate_planted(30, 60, 3, 0.1, 0.4, 0.02, 5);
  CHECK((inst.low_rank + inst.sparse + inst.noise - inst.matrix).norm() == 0.0);
  CHECK(((inst.sparse.array() != 0.0) == inst.support).all());
  CHECK((inst.sparse.array().abs() == 0.4 || inst.sparse.array() == 0.0).all());
  CHECK((inst.true_subspace.transpose() * inst.true_subspace - MatrixXd::Identity(3, 3)).norm() <= 1e-12);
  CHECK(oracle::principal_angle_deg(inst.low_rank, inst.true_subspace) <= 1e-6);
}

TEST_CASE("planted: support size within 10% of the binomial mean") {
  const auto inst = generate_planted(100, 1000, 3, 0.01, 0.1, 0.01, 6);
  CHECK(inst.support_size() >= 900);
  CHECK(inst.support_size() <= 1100);
}

TEST_CASE("planted: mirrored columns") {
  PlantedOptions o;
  o.rows = 8;
  o.cols = 20;
  o.mirrored = true;
  o.sparse_density = 0.1;
  const auto inst = generate_planted(o);
  for (Eigen::Index j = 0; j < 20; j += 2) CHECK(inst.matrix.col(j) == -inst.matrix.col(j + 1));
  CHECK(inst.matrix.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  o.cols = 21;
  CHECK_THROWS_AS(generate_planted(o), InvalidArgument);
}

TEST_CASE("planted: parameter violations") {
  CHECK_THROWS_AS(generate_planted(5, 5, 5, 0.0, 1.0, 0.0, 0), InvalidArgument);
  CHECK_THROWS_AS(generate_planted(5, 9, 2, 1.0, 1.0, 0.0, 0), InvalidArgument);
  CHECK_THROWS_AS(generate_planted(5, 9, 2, 0.1, 0.0, 0.0, 0), InvalidArgument);
  CHECK_THROWS_AS(generate_planted(5, 9, 2, 0.1, 1.0, -1.0, 0), InvalidArgument);
  CHECK_THROWS_AS(generate_planted(0, 9, 0, 0.1, 1.0, 0.0, 0), InvalidArgument);
}

TEST_CASE("toy store: noiseless pseudo direction is recovered exactly") {
  ToyStoreOptions o;
  o.num_words = 25;
  o.senses_per_word = {1, 2, 3};
  o.dimension = 8;
  o.pseudo_direction = VectorXd::Unit(8, 0);
  o.seed = 2;
  const auto toy = generate_toy_store(o);
  CHECK(toy.store.words().size() == 25);
  CHECK(toy.store.words()[0] == "w0000");
  CHECK(toy.store.num_senses("w0002") == 3);
  const auto m = build_diff_matrix(toy.store);
  for (Eigen::Index j = 0; j < m.data.cols(); ++j) CHECK(m.data.col(j).tail(7).isZero(0.0));
  const auto dec = pca_decompose(m, 1);
  CHECK((dec.components.col(0) - VectorXd::Unit(8, 0)).norm() <= 1e-8);
  CHECK(toy.pseudo_pairs.size() == 8 * 1 + 8 * 3);
}

TEST_CASE("toy store: noisy direction is recovered within 2 degrees") {
  Rng rng(3);
  const VectorXd dir = oracle::random_vector(rng, 16).normalized();
  ToyStoreOptions o;
  o.num_words = 80;
  o.senses_per_word = {2, 3};
  o.dimension = 16;
  o.pseudo_direction = dir;
  o.noise_sigma = 0.01;
  o.seed = 4;
  const auto toy = generate_toy_store(o);
  const auto dec = pca_decompose(build_diff_matrix(toy.store), 1);
  CHECK(oracle::angle_between_deg(dec.components.col(0), dir) <= 2.0);
}

TEST_CASE("toy store: real-sense words get independent offsets") {
  ToyStoreOptions o;
  o.num_words = 40;
  o.senses_per_word = {3};
  o.dimension = 6;
  o.pseudo_direction = VectorXd::Unit(6, 1);
  o.real_sense_fraction = 0.5;
  o.seed = 5;
  const auto toy = generate_toy_store(o);
  CHECK(!toy.real_sense_words.empty());
  CHECK(toy.real_sense_words.size() < 40);
  for (const auto& w : toy.real_sense_words) {
    const auto s = toy.store.senses_of(w);
    CHECK_FALSE((s[0].vector - s[1].vector).tail(4).isZero(1e-12));
  }
  CHECK(toy.pseudo_pairs.size() == 3 * (40 - toy.real_sense_words.size()));
}

TEST_CASE("toy store: parameter violations") {
  ToyStoreOptions o;
  o.num_words = 0;
  CHECK_THROWS_AS(generate_toy_store(o), InvalidArgument);
  o.num_words = 2;
  o.senses_per_word = {0};
  CHECK_THROWS_AS(generate_toy_store(o), InvalidArgument);
  o.senses_per_word = {2};
  o.pseudo_direction = VectorXd::Zero(o.dimension);
  CHECK_THROWS_AS(generate_toy_store(o), InvalidArgument);
  o.pseudo_direction = VectorXd::Ones(3);
  CHECK_THROWS_AS(generate_toy_store(o), InvalidArgument);
}

TEST_CASE("contextual benchmark structure") {
  BenchmarkOptions o;
  o.num_words = 12;
  o.num_pairs = 40;
  o.dimension = 10;
  const auto bench = generate_contextual_benchmark(o);
  CHECK(bench.dataset.contextual);
  CHECK(bench.dataset.pairs.size() == 40);
  CHECK(bench.pseudo_direction.norm() == doctest::Approx(1.0));
  for (const auto& p : bench.dataset.pairs) {
    CHECK(p.word1 != p.word2);
    REQUIRE(p.context1.has_value());
    CHECK(p.context1->tokens[p.context1->target] == p.word1);
    const auto& marker = p.context1->tokens[0];
    REQUIRE(bench.store.global_vector(marker) != nullptr);
    // the marker's global vector is the cluster center of the sense it names
    const auto sense = static_cast<std::size_t>(std::stoul(marker.substr(marker.rfind(':') + 1)));
    CHECK(*bench.store.global_vector(marker) == *bench.store.sense(p.word1, sense).cluster_center);
    CHECK(std::abs(p.gold) <= 1.0);
  }
  const auto again = generate_contextual_benchmark(o);
  CHECK(again.store == bench.store);
}
