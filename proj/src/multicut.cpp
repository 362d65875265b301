#include "mcvc/multicut.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>

namespace mcvc::multicut {

namespace {

// Moves must improve the objective by more than this to be applied.
constexpr double kImprovementEps = 1e-12;

// Local moves must also beat this fraction of the summed |cost| they touch,
// so rounding noise cannot pass for an improvement.
constexpr double kRelativeEps = 1e-10;

constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

// Kernighan-Lin sequence between clusters a and b (b may be empty): moves
// every node of a and b across once, greedily by delta, then keeps the best
// prefix. Returns true when that prefix lowers the objective.
bool improve_pair(const CostGraph& graph, std::vector<std::size_t>& label,
                  std::vector<std::size_t>& size, std::size_t a, std::size_t b) {
  std::vector<std::size_t> nodes;
  std::vector<char> in_b;
  for (std::size_t v = 0; v < label.size(); ++v) {
    if (label[v] == a || label[v] == b) {
      nodes.push_back(v);
      in_b.push_back(label[v] == b);
    }
  }
  const std::size_t m = nodes.size();
  // delta[i]: objective change when nodes[i] alone switches side.
  std::vector<double> delta(m, 0.0);
  double magnitude = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i == j) continue;
      const double w = graph.cost(nodes[i], nodes[j]);
      delta[i] += in_b[i] == in_b[j] ? w : -w;
      magnitude += std::abs(w);
    }
  }
  std::vector<char> moved(m, 0);
  std::vector<std::size_t> order;
  double total = 0.0;
  double best_total = -std::max(kImprovementEps, kRelativeEps * magnitude);
  std::size_t best_len = 0;
  for (std::size_t step = 0; step < m; ++step) {
    std::size_t pick = kUnassigned;
    for (std::size_t i = 0; i < m; ++i) {
      if (!moved[i] && (pick == kUnassigned || delta[i] < delta[pick])) pick = i;
    }
    total += delta[pick];
    moved[pick] = 1;
    order.push_back(pick);
    in_b[pick] = !in_b[pick];
    for (std::size_t j = 0; j < m; ++j) {
      if (moved[j]) continue;
      const double w = graph.cost(nodes[pick], nodes[j]);
      delta[j] += in_b[j] == in_b[pick] ? 2.0 * w : -2.0 * w;
    }
    if (total < best_total) {
      best_total = total;
      best_len = step + 1;
    }
  }
  for (std::size_t s = 0; s < best_len; ++s) {
    const std::size_t v = nodes[order[s]];
    const std::size_t to = label[v] == a ? b : a;
    --size[label[v]];
    ++size[to];
    label[v] = to;
  }
  return best_len > 0;
}

}  // namespace

Clustering::Clustering(const std::vector<std::size_t>& labels) {
  labels_.resize(labels.size());
  std::vector<std::pair<std::size_t, std::size_t>> seen;  // raw -> canonical
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find_if(seen.begin(), seen.end(),
                           [&](const auto& p) { return p.first == labels[i]; });
    if (it == seen.end()) {
      seen.emplace_back(labels[i], seen.size());
      labels_[i] = seen.back().second;
    } else {
      labels_[i] = it->second;
    }
  }
  k_ = seen.size();
}

Clustering Clustering::singletons(std::size_t n) {
  std::vector<std::size_t> l(n);
  for (std::size_t i = 0; i < n; ++i) l[i] = i;
  return Clustering(l);
}

Clustering Clustering::one_cluster(std::size_t n) {
  return Clustering(std::vector<std::size_t>(n, 0));
}

std::vector<std::size_t> Clustering::sizes() const {
  std::vector<std::size_t> s(k_, 0);
  for (std::size_t l : labels_) ++s[l];
  return s;
}

std::string to_string(Solver solver) {
  switch (solver) {
    case Solver::kGaec: return "gaec";
    case Solver::kGaecKlj: return "gaec+klj";
    case Solver::kKlj: return "klj";
    case Solver::kExact: return "exact";
  }
  return "unknown";
}

double objective(const CostGraph& graph, const Clustering& clustering) {
  if (clustering.n() != graph.n()) {
    throw InvalidArgument("objective: clustering has " + std::to_string(clustering.n()) +
                          " nodes, graph has " + std::to_string(graph.n()));
  }
  double total = 0.0;
  std::size_t e = 0;
  for (std::size_t u = 0; u < graph.n(); ++u) {
    for (std::size_t v = u + 1; v < graph.n(); ++v, ++e) {
      if (clustering[u] != clustering[v]) total += graph.costs()[e];
    }
  }
  return total;
}

SolveResult gaec(const CostGraph& graph) {
  const std::size_t n = graph.n();
  // Inter-cluster costs, indexed by the representative (smallest node) of
  // each cluster, in the graph's upper-triangular layout.
  std::vector<double> w = graph.costs();
  std::vector<bool> active(n, true);
  std::vector<std::uint32_t> version(n, 0);
  std::vector<std::size_t> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = i;

  struct Candidate {
    double cost;
    std::size_t u, v;  // u < v
    std::uint32_t ver_u, ver_v;
  };
  auto lower_priority = [](const Candidate& a, const Candidate& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.u != b.u) return a.u > b.u;
    return a.v > b.v;
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(lower_priority)> heap(
      lower_priority);
  for (std::size_t u = 0, e = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v, ++e) {
      if (w[e] > 0.0) heap.push({w[e], u, v, 0, 0});
    }
  }

  std::size_t contractions = 0;
  while (!heap.empty()) {
    const Candidate top = heap.top();
    heap.pop();
    if (!active[top.u] || !active[top.v] || version[top.u] != top.ver_u ||
        version[top.v] != top.ver_v) {
      continue;
    }
    const std::size_t a = top.u;
    const std::size_t b = top.v;
    active[b] = false;
    parent[b] = a;
    ++version[a];
    ++contractions;
    for (std::size_t c = 0; c < n; ++c) {
      if (!active[c] || c == a) continue;
      const std::size_t ac = graph.edge_index(a, c);
      w[ac] += w[graph.edge_index(b, c)];
      if (w[ac] > 0.0) {
        const std::size_t lo = std::min(a, c);
        const std::size_t hi = std::max(a, c);
        heap.push({w[ac], lo, hi, version[lo], version[hi]});
      }
    }
  }

  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = i;
    while (parent[r] != r) r = parent[r];
    labels[i] = r;
  }
  SolveResult result{Clustering(labels), 0.0, Solver::kGaec, contractions};
  result.objective = objective(graph, result.clustering);
  return result;
}

SolveResult klj_refine(const CostGraph& graph, const Clustering& start) {
  const std::size_t n = graph.n();
  if (start.n() != n) {
    throw InvalidArgument("klj_refine: clustering size does not match graph");
  }
  std::vector<std::size_t> label = start.labels();
  std::vector<std::size_t> size(n, 0);
  for (std::size_t l : label) ++size[l];

  auto first_free_id = [&] {
    for (std::size_t c = 0; c < n; ++c) {
      if (size[c] == 0) return c;
    }
    return kUnassigned;
  };

  std::size_t passes = 0;
  std::vector<double> to_cluster(n);
  bool changed = true;
  while (changed) {
    changed = false;
    ++passes;

    // Single-node moves.
    for (std::size_t v = 0; v < n; ++v) {
      std::fill(to_cluster.begin(), to_cluster.end(), 0.0);
      double magnitude = 0.0;
      for (std::size_t u = 0; u < n; ++u) {
        if (u == v) continue;
        const double w = graph.cost(u, v);
        to_cluster[label[u]] += w;
        magnitude += std::abs(w);
      }
      const std::size_t from = label[v];
      const double internal = to_cluster[from];
      double best_delta = -std::max(kImprovementEps, kRelativeEps * magnitude);
      std::size_t best_target = kUnassigned;
      for (std::size_t c = 0; c < n; ++c) {
        if (c == from || size[c] == 0) continue;
        const double delta = internal - to_cluster[c];
        if (delta < best_delta) {
          best_delta = delta;
          best_target = c;
        }
      }
      if (size[from] > 1 && internal < best_delta) {
        best_delta = internal;
        best_target = first_free_id();
      }
      if (best_target != kUnassigned) {
        --size[from];
        ++size[best_target];
        label[v] = best_target;
        changed = true;
      }
    }

    // Cluster joins.
    std::vector<std::size_t> ids;
    for (std::size_t c = 0; c < n; ++c) {
      if (size[c] > 0) ids.push_back(c);
    }
    const std::size_t k = ids.size();
    std::vector<std::size_t> slot(n, kUnassigned);
    for (std::size_t i = 0; i < k; ++i) slot[ids[i]] = i;
    std::vector<double> between(k * k, 0.0);
    for (std::size_t u = 0, e = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v, ++e) {
        const std::size_t a = slot[label[u]];
        const std::size_t b = slot[label[v]];
        if (a != b) {
          between[a * k + b] += graph.costs()[e];
          between[b * k + a] += graph.costs()[e];
        }
      }
    }
    std::vector<std::size_t> merged_into(k);
    for (std::size_t i = 0; i < k; ++i) merged_into[i] = i;
    std::vector<bool> alive(k, true);
    for (std::size_t a = 0; a < k; ++a) {
      if (!alive[a]) continue;
      for (std::size_t b = a + 1; b < k; ++b) {
        if (!alive[b] || between[a * k + b] <= kImprovementEps) continue;
        alive[b] = false;
        merged_into[b] = a;
        for (std::size_t c = 0; c < k; ++c) {
          if (!alive[c] || c == a) continue;
          between[a * k + c] += between[b * k + c];
          between[c * k + a] = between[a * k + c];
        }
        changed = true;
      }
    }
    for (std::size_t v = 0; v < n; ++v) {
      std::size_t s = slot[label[v]];
      while (merged_into[s] != s) s = merged_into[s];
      const std::size_t target = ids[s];
      if (target != label[v]) {
        --size[label[v]];
        ++size[target];
        label[v] = target;
      }
    }
    if (changed) continue;

    // At a local optimum of the moves above: try move sequences between
    // pairs of clusters and between each cluster and a fresh one.
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = i + 1; j < k; ++j) {
        if (size[ids[i]] == 0 || size[ids[j]] == 0) continue;
        if (improve_pair(graph, label, size, ids[i], ids[j])) changed = true;
      }
      if (size[ids[i]] > 1 && improve_pair(graph, label, size, ids[i], first_free_id())) {
        changed = true;
      }
    }
  }

  SolveResult result{Clustering(label), 0.0, Solver::kKlj, passes};
  result.objective = objective(graph, result.clustering);
  // Moves are only taken when strictly improving; this guards against the
  // input's own objective being lower through rounding.
  if (const double before = objective(graph, start); before < result.objective) {
    result.clustering = start;
    result.objective = before;
  }
  return result;
}

SolveResult brute_force(const CostGraph& graph) {
  const std::size_t n = graph.n();
  if (n > kBruteForceMaxNodes) {
    throw InvalidArgument("brute_force: n = " + std::to_string(n) + " exceeds " +
                          std::to_string(kBruteForceMaxNodes));
  }
  if (n == 0) return {Clustering(), 0.0, Solver::kExact, 1};

  // Restricted growth strings, enumerated in lexicographic order; each one is
  // already a canonical labeling.
  std::vector<std::size_t> rgs(n, 0);
  std::vector<std::size_t> prefix_max(n, 0);  // max of rgs[0..i]
  std::vector<std::size_t> best = rgs;
  double best_cost = std::numeric_limits<double>::infinity();
  std::size_t visited = 0;
  auto cost_of = [&] {
    double total = 0.0;
    std::size_t e = 0;
    for (std::size_t u = 0; u < n; ++u) {
      for (std::size_t v = u + 1; v < n; ++v, ++e) {
        if (rgs[u] != rgs[v]) total += graph.costs()[e];
      }
    }
    return total;
  };
  while (true) {
    ++visited;
    if (const double c = cost_of(); c < best_cost) {
      best_cost = c;
      best = rgs;
    }
    std::size_t i = n - 1;
    while (i > 0 && rgs[i] > prefix_max[i - 1]) --i;
    if (i == 0) break;
    ++rgs[i];
    prefix_max[i] = std::max(prefix_max[i - 1], rgs[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      rgs[j] = 0;
      prefix_max[j] = prefix_max[i];
    }
  }
  SolveResult result{Clustering(best), 0.0, Solver::kExact, visited};
  result.objective = objective(graph, result.clustering);
  return result;
}

SolveResult solve(const CostGraph& graph) {
  const SolveResult greedy = gaec(graph);
  SolveResult refined = klj_refine(graph, greedy.clustering);
  refined.solver = Solver::kGaecKlj;
  refined.iterations += greedy.iterations;
  return refined;
}

}  // namespace mcvc::multicut
