#include "mcvc/simgraph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>

#include "mcvc/parallel.hpp"

namespace mcvc::simgraph {

namespace fs = std::filesystem;

CostGraph::CostGraph(std::size_t n, std::vector<double> costs, double cal)
    : n_(n), cal_(cal), costs_(std::move(costs)) {
  if (costs_.size() != edge_count(n_)) {
    throw InvalidArgument("CostGraph: expected " + std::to_string(edge_count(n_)) +
                          " edge costs, got " + std::to_string(costs_.size()));
  }
  for (double w : costs_) {
    if (!std::isfinite(w)) throw InvalidArgument("CostGraph: non-finite edge cost");
  }
}

SimilarityMatrix cosine_matrix(const Matrix& vectors, unsigned threads) {
  const std::size_t n = vectors.rows();
  Matrix unit = vectors;
  for (std::size_t i = 0; i < n; ++i) {
    const double len = norm(unit.row(i));
    if (len == 0.0) {
      throw InvalidArgument("cosine_matrix: row " + std::to_string(i) + " has zero norm");
    }
    for (double& x : unit.row(i)) x /= len;
  }

  SimilarityMatrix sim{n, std::vector<double>(n * n, 0.0)};
  // Strided row assignment balances the triangular workload.
  parallel_for(n, threads, [&](std::size_t i) {
    sim.values[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = std::clamp(dot(unit.row(i), unit.row(j)), -1.0, 1.0);
      sim.values[i * n + j] = s;
      sim.values[j * n + i] = s;
    }
  });
  return sim;
}

double linear_shift(double similarity, double cal) { return similarity - (1.0 - cal); }

CostGraph calibrate(const SimilarityMatrix& sim, double cal, CalibrationFn transform) {
  if (!(cal > 0.0 && cal < 1.0)) {
    throw InvalidArgument("calibrate: cal must lie in (0, 1), got " + std::to_string(cal));
  }
  std::vector<double> costs;
  costs.reserve(CostGraph::edge_count(sim.n));
  for (std::size_t i = 0; i < sim.n; ++i) {
    for (std::size_t j = i + 1; j < sim.n; ++j) costs.push_back(transform(sim(i, j), cal));
  }
  return CostGraph(sim.n, std::move(costs), cal);
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff),
                     static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

void write_graph(const CostGraph& graph, const fs::path& file) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  out.write("MCGW", 4);
  put_u32(out, static_cast<std::uint32_t>(graph.n()));
  for (double w : graph.costs()) {
    put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(w)));
  }
  if (!out) throw Error("write failed: " + file.string());
}

CostGraph read_graph(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("missing graph file: " + file.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 8 || std::string(bytes.begin(), bytes.begin() + 4) != "MCGW") {
    throw FormatError("bad magic in graph file " + file.string());
  }
  const std::size_t n = get_u32(bytes.data() + 4);
  const std::size_t m = CostGraph::edge_count(n);
  if (bytes.size() - 8 != m * 4) {
    throw FormatError("graph file " + file.string() + " holds " +
                      std::to_string((bytes.size() - 8) / 4) + " costs, expected " +
                      std::to_string(m));
  }
  std::vector<double> costs(m);
  for (std::size_t e = 0; e < m; ++e) {
    const float w = std::bit_cast<float>(get_u32(bytes.data() + 8 + 4 * e));
    if (!std::isfinite(w)) throw FormatError("non-finite cost in " + file.string());
    costs[e] = w;
  }
  // The file does not carry cal; 0.5 is a placeholder.
  return CostGraph(n, std::move(costs));
}

}  // namespace mcvc::simgraph
