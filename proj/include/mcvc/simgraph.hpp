#pragma once

// Dense cosine-similarity graph over video vectors and its conversion into
// signed multicut edge costs.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mcvc/matrix.hpp"

namespace mcvc::simgraph {

// Symmetric n x n similarity matrix, diagonal 1.
struct SimilarityMatrix {
  std::size_t n = 0;
  std::vector<double> values;  // n * n, row-major

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

// Complete graph with one cost per unordered pair, stored upper-triangular
// row-major: (0,1), (0,2), ..., (0,n-1), (1,2), ...
// Positive cost = attractive (prefer join), negative = repulsive (prefer cut).
class CostGraph {
 public:
  CostGraph() = default;
  explicit CostGraph(std::size_t n, double cal = 0.5)
      : n_(n), cal_(cal), costs_(edge_count(n), 0.0) {}
  CostGraph(std::size_t n, std::vector<double> costs, double cal = 0.5);

  static std::size_t edge_count(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

  std::size_t n() const { return n_; }
  double cal() const { return cal_; }
  const std::vector<double>& costs() const { return costs_; }

  std::size_t edge_index(std::size_t u, std::size_t v) const {
    if (u > v) std::swap(u, v);
    return u * n_ - u * (u + 1) / 2 + (v - u - 1);
  }
  double cost(std::size_t u, std::size_t v) const { return costs_[edge_index(u, v)]; }
  void set_cost(std::size_t u, std::size_t v, double w) { costs_[edge_index(u, v)] = w; }

 private:
  std::size_t n_ = 0;
  double cal_ = 0.5;
  std::vector<double> costs_;
};

// Pairwise cosine similarities. Each pair is computed once and mirrored;
// `threads` splits rows into blocks without affecting the result.
SimilarityMatrix cosine_matrix(const Matrix& vectors, unsigned threads = 1);

// Maps a similarity and calibration value to an edge cost.
using CalibrationFn = double (*)(double similarity, double cal);

// w = s - (1 - cal).
double linear_shift(double similarity, double cal);

CostGraph calibrate(const SimilarityMatrix& sim, double cal,
                    CalibrationFn transform = &linear_shift);

// "MCGW" | u32 n | n(n-1)/2 little-endian f32 costs, upper-triangular order.
void write_graph(const CostGraph& graph, const std::filesystem::path& file);
CostGraph read_graph(const std::filesystem::path& file);

}  // namespace mcvc::simgraph
