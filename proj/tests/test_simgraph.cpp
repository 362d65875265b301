#include <doctest.h>

#include <cmath>
#include <fstream>
#include <iterator>
#include <random>

#include "mcvc/simgraph.hpp"
#include "oracles.hpp"

using namespace mcvc;
using namespace mcvc::simgraph;
using doctest::Approx;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t n, std::size_t d) {
  std::normal_distribution<double> g;
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) m(i, c) = g(rng);
  }
  return m;
}

}  // namespace

TEST_CASE("cosine examples") {
  const auto s = cosine_matrix(Matrix::from_rows({{1, 0, 0}, {0, 1, 0}, {0, 0, 2}}));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) CHECK(s(i, j) == (i == j ? 1.0 : 0.0));
  }
  CHECK(cosine_matrix(Matrix::from_rows({{1, 2}, {3, 6}}))(0, 1) == Approx(1.0));
  CHECK(cosine_matrix(Matrix::from_rows({{1, 0}, {1, 1}}))(0, 1) ==
        Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_WITH_AS(cosine_matrix(Matrix::from_rows({{1, 0}, {0, 0}})),
                       doctest::Contains("row 1"), InvalidArgument);
}

TEST_CASE("cosine matrix invariants, normalization and thread independence") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 1 + rng() % 40, d = 1 + rng() % 10;
    const auto m = random_matrix(rng, n, d);
    const auto s = cosine_matrix(m, 1);
    Matrix unit(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      const double len = norm(m.row(i));
      for (std::size_t c = 0; c < d; ++c) unit(i, c) = m(i, c) / len;
    }
    const auto su = cosine_matrix(unit, 1);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(s(i, i) - 1) <= 1e-6);
      for (std::size_t j = 0; j < n; ++j) {
        CHECK(s(i, j) == s(j, i));
        CHECK(std::abs(s(i, j)) <= 1.0);
        CHECK(std::abs(s(i, j) - su(i, j)) <= 1e-6);
        std::vector<double> a(m.row(i).begin(), m.row(i).end());
        std::vector<double> b(m.row(j).begin(), m.row(j).end());
        CHECK(s(i, j) == Approx(oracle::cos_sim(a, b)).epsilon(1e-12).scale(1));
      }
    }
    for (unsigned threads : {2u, 3u, 8u}) CHECK(cosine_matrix(m, threads).values == s.values);
  }
}

TEST_CASE("calibration examples") {
  SimilarityMatrix s{2, {1.0, 0.5, 0.5, 1.0}};
  CHECK(calibrate(s, 0.5).cost(0, 1) == Approx(0.0));
  s.values = {1.0, 0.8, 0.8, 1.0};
  CHECK(calibrate(s, 0.1).cost(0, 1) == Approx(-0.1));
  CHECK(calibrate(s, 0.1).cal() == 0.1);
  CHECK(linear_shift(0.3, 0.6) == Approx(-0.1));
  CHECK_THROWS_AS(calibrate(s, 0.0), InvalidArgument);
  CHECK_THROWS_AS(calibrate(s, 1.0), InvalidArgument);
}

TEST_CASE("raising cal never turns an attractive edge repulsive") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 20; ++t) {
    const auto s = cosine_matrix(random_matrix(rng, 25, 4));
    const auto lo = calibrate(s, 0.1);
    const auto hi = calibrate(s, 0.9);
    for (std::size_t e = 0; e < lo.costs().size(); ++e) {
      CHECK(hi.costs()[e] - lo.costs()[e] == Approx(0.8));
    }
    double prev_cal = 0.01;
    auto prev = calibrate(s, prev_cal);
    for (double cal = 0.05; cal < 1.0; cal += 0.05) {
      const auto g = calibrate(s, cal);
      for (std::size_t e = 0; e < g.costs().size(); ++e) {
        CHECK(g.costs()[e] > prev.costs()[e]);
        if (prev.costs()[e] > 0) CHECK(g.costs()[e] > 0);
      }
      prev = g;
    }
  }
}

TEST_CASE("edge indexing is upper-triangular row-major") {
  for (std::size_t n = 2; n < 12; ++n) {
    CostGraph g(n);
    std::size_t expect = 0;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v) {
        CHECK(g.edge_index(u, v) == expect);
        CHECK(g.edge_index(v, u) == expect);
        ++expect;
      }
    }
    CHECK(expect == CostGraph::edge_count(n));
  }
  CHECK(CostGraph::edge_count(0) == 0);
  CHECK(CostGraph::edge_count(1) == 0);
  CHECK_THROWS_AS(CostGraph(3, std::vector<double>{1, 2}), InvalidArgument);
  CHECK_THROWS_AS(CostGraph(2, std::vector<double>{NAN}), InvalidArgument);
}

TEST_CASE("graph file layout and round trip") {
  CostGraph g(4, {0.5, -0.25, 1.0, 2.0, -3.0, 0.125}, 0.7);
  const auto dir = oracle::temp_dir("graph");
  write_graph(g, dir / "graph.bin");
  std::ifstream in(dir / "graph.bin", std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  REQUIRE(bytes.size() == 8 + 6 * 4);
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "MCGW");
  CHECK(bytes[4] == 4);
  CHECK(bytes[5] == 0);
  // 0.5f = 0x3F000000 little-endian.
  CHECK(bytes[8] == 0x00);
  CHECK(bytes[11] == 0x3F);
  const auto back = read_graph(dir / "graph.bin");
  CHECK(back.n() == 4);
  CHECK(back.costs() == g.costs());

  std::ofstream(dir / "bad.bin", std::ios::binary) << "MCGX";
  CHECK_THROWS_AS(read_graph(dir / "bad.bin"), FormatError);
  CHECK_THROWS_AS(read_graph(dir / "missing.bin"), FormatError);
}
