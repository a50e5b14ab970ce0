#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "pseudosense/embedding_store.hpp"
#include "pseudosense/errors.hpp"
#include "tempdir.hpp"

using namespace pseudosense;

namespace {

EmbeddingStore parse(const std::string& text) {
  std::istringstream in(text);
  return read_canonical(in);
}

std::string render(const EmbeddingStore& s) {
  std::ostringstream out;
  write_canonical(s, out);
  return out.str();
}

}  // namespace

TEST_CASE("canonical: two-sense word parses with inferred dimension") {
  const auto store = parse("2 3\ncat#0 0.1 0.2 0.3\ncat#1 0.0 1.0 0.0\n");
  CHECK(store.dimension() == 3);
  CHECK(store.num_senses("cat") == 2);
  const auto& s0 = store.sense("cat", 0);
  CHECK(s0.vector == Eigen::Vector3d(0.1, 0.2, 0.3));
  CHECK(s0.original_id == 0);
  CHECK_FALSE(s0.cluster_center.has_value());
}

TEST_CASE("canonical: short line is a dimension mismatch with its line number") {
  try {
    parse("2 3\ncat#0 0.1 0.2 0.3\ncat#1 0.0 1.0\n");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("dimension") != std::string::npos);
  }
}

TEST_CASE("canonical: error paths") {
  CHECK_THROWS_AS(parse(""), FormatError);
  CHECK_THROWS_AS(parse("\n\n"), FormatError);
  CHECK_THROWS_AS(parse("two 3\n"), FormatError);
  CHECK_THROWS_AS(parse("1\ncat#0 1\n"), FormatError);
  CHECK_THROWS_AS(parse("2 2\ncat#0 1 2\ncat#0 3 4\n"), FormatError);  // duplicate
  CHECK_THROWS_AS(parse("2 2\ncat#0 1 2\n"), FormatError);             // count mismatch
  CHECK_THROWS_AS(parse("1 2\ncat 1 2\n"), FormatError);               // no sense id
  CHECK_THROWS_AS(parse("1 2\ncat#x 1 2\n"), FormatError);
  CHECK_THROWS_AS(parse("1 2\ncat#-1 1 2\n"), FormatError);
  CHECK_THROWS_AS(parse("1 2\ncat#0 1 nan\n"), FormatError);
  CHECK_THROWS_AS(parse("1 2\ncat#0 1 abc\n"), FormatError);
  CHECK_THROWS_AS(parse("1 2\ncat#0 1 2\n#CLUSTERS\ndog#0 1 2\n"), FormatError);
}

TEST_CASE("canonical: word containing '#' splits at the last marker") {
  const auto store = parse("1 2\nC#lang#3 1 2\n");
  CHECK(store.contains("C#lang"));
  CHECK(store.sense("C#lang", 0).original_id == 3);
}

TEST_CASE("sense ids are normalized to a dense range and keep their original ids") {
  const auto store = parse("4 1\nprime#7 1\nprime#6 2\nyard#6 3\nyard#0 4\n");
  REQUIRE(store.num_senses("prime") == 2);
  CHECK(store.sense("prime", 0).original_id == 6);
  CHECK(store.sense("prime", 0).vector[0] == 2.0);
  CHECK(store.sense("prime", 1).original_id == 7);
  CHECK(store.sense("yard", 0).original_id == 0);
  CHECK(store.sense("yard", 1).original_id == 6);
  CHECK(store.sense_by_original("yard", 6).sense_id == 1);
  CHECK_THROWS_AS(store.sense_by_original("yard", 3), LookupError);
  CHECK(store.words() == std::vector<std::string>{"prime", "yard"});

  const auto again = parse("4 1\nprime#7 1\nprime#6 2\nyard#6 3\nyard#0 4\n");
  CHECK(again == store);
  CHECK(render(again) == render(store));
}

TEST_CASE("get_sense lookups") {
  const auto store = parse("2 3\ncat#0 0.1 0.2 0.3\ncat#1 0.0 1.0 0.0\n");
  CHECK(store.sense("cat", 0).vector == Eigen::Vector3d(0.1, 0.2, 0.3));
  CHECK_THROWS_AS(store.sense("dog", 0), LookupError);
  CHECK_THROWS_AS(store.sense("cat", 5), LookupError);
  CHECK_THROWS_AS(store.senses_of("dog"), LookupError);
  CHECK_THROWS_AS(store.num_senses("dog"), LookupError);
}

TEST_CASE("builder rejects invalid senses") {
  EmbeddingStoreBuilder b(2);
  CHECK_THROWS_AS(b.add_sense("a", 0, Eigen::Vector3d::Zero()), InvalidArgument);
  CHECK_THROWS_AS(b.add_sense("a", -1, Eigen::Vector2d::Zero()), InvalidArgument);
  CHECK_THROWS_AS(b.add_sense("", 0, Eigen::Vector2d::Zero()), InvalidArgument);
  CHECK_THROWS_AS(b.add_sense("a", 0, Eigen::Vector2d::Zero(), Eigen::VectorXd(Eigen::Vector3d::Zero())),
                  InvalidArgument);
  b.add_sense("a", 0, Eigen::Vector2d::Zero());
  CHECK_THROWS_AS(b.add_sense("a", 0, Eigen::Vector2d::Ones()), InvalidArgument);
  CHECK_THROWS_AS(EmbeddingStoreBuilder(0), InvalidArgument);
}

TEST_CASE("write: empty vocabulary writes only the header") {
  const auto empty = EmbeddingStoreBuilder(4).build();
  CHECK(empty.empty());
  CHECK(render(empty) == "0 4\n");
  const auto back = parse(render(empty));
  CHECK(back.empty());
  CHECK(back.dimension() == 4);
}

TEST_CASE("write/load round trip through a file, clusters and globals included") {
  testutil::TempDir dir;
  EmbeddingStoreBuilder b(3);
  b.add_sense("bank", 4, Eigen::Vector3d(1, 2, 3), Eigen::VectorXd(Eigen::Vector3d(0.5, 0, 0)));
  b.add_sense("bank", 1, Eigen::Vector3d(-1, 0.1, 1e-300));
  b.add_sense("river", 0, Eigen::Vector3d(3, 2, 1));
  b.set_global_vector("river", Eigen::Vector3d(0.25, 0.5, 0.75));
  const auto store = std::move(b).build();
  write_embeddings(store, dir / "e.txt");
  const auto back = load_embeddings(dir / "e.txt");
  CHECK(back == store);
  REQUIRE(back.sense("bank", 1).cluster_center.has_value());
  CHECK_FALSE(back.sense("bank", 0).cluster_center.has_value());
  REQUIRE(back.global_vector("river") != nullptr);
  CHECK(back.global_vector("bank") == nullptr);
}

TEST_CASE("10k-word random store round trips bitwise") {
  Rng rng(42);
  EmbeddingStoreBuilder b(6);
  for (int w = 0; w < 10000; ++w) {
    const int n = 1 + static_cast<int>(rng.below(3));
    for (int s = 0; s < n; ++s) {
      Eigen::VectorXd v(6);
      for (int i = 0; i < 6; ++i) v[i] = rng.normal() * std::pow(10.0, static_cast<double>(rng.below(40)) - 20.0);
      b.add_sense("tok" + std::to_string(w), s * 3, v);
    }
  }
  const auto store = std::move(b).build();
  const auto back = parse(render(store));
  REQUIRE(back.size() == store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& a = store.senses()[i].vector;
    const auto& c = back.senses()[i].vector;
    CHECK(std::memcmp(a.data(), c.data(), sizeof(double) * 6) == 0);
  }
  CHECK(back == store);
}

TEST_CASE("format_double is shortest round-trip") {
  for (const double v : {0.1, 1.0 / 3.0, -2.5e-310, 1e300, 0.0, 123456789.125}) {
    const auto s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("MSSG: cluster centers populated and round trip is exact") {
  const std::string text =
      "2 2\n"
      "bank 2\n"
      "0.5 0.5\n"
      "1 0\n"
      "0.9 0.1\n"
      "0 1\n"
      "0.1 0.9\n"
      "cat 1\n"
      "0 0\n"
      "3 4\n"
      "3 4\n";
  std::istringstream in(text);
  const auto store = read_mssg(in);
  CHECK(store.dimension() == 2);
  CHECK(store.size() == 3);
  for (const auto& s : store.senses()) CHECK(s.cluster_center.has_value());
  CHECK(*store.sense("bank", 1).cluster_center == Eigen::Vector2d(0.1, 0.9));
  REQUIRE(store.global_vector("bank") != nullptr);
  CHECK(*store.global_vector("bank") == Eigen::Vector2d(0.5, 0.5));

  std::ostringstream out;
  write_mssg(store, out);
  std::istringstream in2(out.str());
  CHECK(read_mssg(in2) == store);

  // also survives the canonical format
  CHECK(parse(render(store)) == store);
}

TEST_CASE("MSSG: truncated and malformed files") {
  auto read = [](const std::string& t) {
    std::istringstream in(t);
    return read_mssg(in);
  };
  CHECK_THROWS_AS(read("1 2\nbank 2\n0 0\n1 0\n0 1\n"), FormatError);
  CHECK_THROWS_AS(read("1 2\nbank\n"), FormatError);
  CHECK_THROWS_AS(read("1 2\nbank 1\n0 0\n1 0 2\n0 1\n"), FormatError);
  CHECK_THROWS_AS(read("1 2\nbank 1\n0 0\n1 0\n0 1\nextra 1\n"), FormatError);
}

TEST_CASE("map_vectors keeps centers and globals") {
  EmbeddingStoreBuilder b(2);
  b.add_sense("a", 0, Eigen::Vector2d(1, 2), Eigen::VectorXd(Eigen::Vector2d(3, 4)));
  b.set_global_vector("a", Eigen::Vector2d(5, 6));
  const auto store = std::move(b).build();
  const auto mapped = store.map_vectors([](const Eigen::VectorXd& v) { return Eigen::VectorXd(2 * v); });
  CHECK(mapped.sense("a", 0).vector == Eigen::Vector2d(2, 4));
  CHECK(*mapped.sense("a", 0).cluster_center == Eigen::Vector2d(3, 4));
  CHECK(*mapped.global_vector("a") == Eigen::Vector2d(5, 6));
  CHECK_THROWS_AS(store.map_vectors([](const Eigen::VectorXd&) { return Eigen::VectorXd(3); }),
                  InvalidArgument);
}

TEST_CASE("parse_embedding_format") {
  CHECK(parse_embedding_format("mssg") == EmbeddingFormat::mssg);
  CHECK(parse_embedding_format("canonical") == EmbeddingFormat::canonical);
  CHECK_THROWS_AS(parse_embedding_format("glove"), InvalidArgument);
}

TEST_CASE("property: random stores round trip in both formats") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const auto store = oracle::random_store(rng, 1 + rng.below(12), 4, 1 + rng.below(6));
    CHECK(parse(render(store)) == store);
  }
}
