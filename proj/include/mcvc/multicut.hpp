#pragma once

// Minimum-cost multicut on a complete signed graph. Solutions are node
// partitions, so every returned labeling is a feasible multicut: the cut set is
// exactly the edges whose endpoints carry different labels.

#include <cstddef>
#include <string>
#include <vector>

#include "mcvc/simgraph.hpp"

namespace mcvc::multicut {

using simgraph::CostGraph;

// Node labels in canonical form: ids are contiguous from 0 and numbered in
// order of first appearance.
class Clustering {
 public:
  Clustering() = default;
  // Relabels `labels` into canonical form.
  explicit Clustering(const std::vector<std::size_t>& labels);

  static Clustering singletons(std::size_t n);
  static Clustering one_cluster(std::size_t n);

  std::size_t n() const { return labels_.size(); }
  std::size_t k() const { return k_; }
  const std::vector<std::size_t>& labels() const { return labels_; }
  std::size_t operator[](std::size_t i) const { return labels_[i]; }

  // Size of each cluster, indexed by cluster id.
  std::vector<std::size_t> sizes() const;

  friend bool operator==(const Clustering&, const Clustering&) = default;

 private:
  std::vector<std::size_t> labels_;
  std::size_t k_ = 0;
};

enum class Solver { kGaec, kGaecKlj, kKlj, kExact };
std::string to_string(Solver solver);

struct SolveResult {
  Clustering clustering;
  double objective = 0.0;
  Solver solver = Solver::kGaec;
  std::size_t iterations = 0;  // contractions for GAEC, passes for KLj
};

// Sum of the costs of cut edges.
double objective(const CostGraph& graph, const Clustering& clustering);

// Greedy additive edge contraction from singletons: repeatedly merges the
// cluster pair with the largest positive summed cost. Ties go to the smallest
// (first id, second id) pair.
SolveResult gaec(const CostGraph& graph);

// Local search with single-node moves (to another cluster or a fresh
// singleton) and whole-cluster joins, applied while they strictly improve the
// objective. Never returns a worse objective than the input.
SolveResult klj_refine(const CostGraph& graph, const Clustering& start);

inline constexpr std::size_t kBruteForceMaxNodes = 10;

// Exhaustive enumeration of all set partitions. Ties resolve to the
// lexicographically smallest canonical labeling.
SolveResult brute_force(const CostGraph& graph);

// gaec followed by klj_refine.
SolveResult solve(const CostGraph& graph);

}  // namespace mcvc::multicut
