#include "mcvc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "mcvc/parallel.hpp"

namespace mcvc::metrics {

namespace {

struct Compact {
  std::vector<std::size_t> ids;  // per item, 0..k-1 in ascending label order
  std::vector<std::size_t> sizes;
  std::size_t k() const { return sizes.size(); }
};

Compact compact(Labels labels) {
  std::vector<std::size_t> distinct(labels.begin(), labels.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  Compact c;
  c.ids.reserve(labels.size());
  c.sizes.assign(distinct.size(), 0);
  for (std::size_t l : labels) {
    const auto id = static_cast<std::size_t>(
        std::lower_bound(distinct.begin(), distinct.end(), l) - distinct.begin());
    c.ids.push_back(id);
    ++c.sizes[id];
  }
  return c;
}

void require_sizes(std::span<const std::size_t> sizes, const char* who) {
  if (sizes.empty()) throw InvalidArgument(std::string(who) + ": no clusters");
}

const Matrix& checked(const Matrix& vectors, Labels labels, const char* who) {
  if (vectors.rows() != labels.size()) {
    throw InvalidArgument(std::string(who) + ": " + std::to_string(vectors.rows()) +
                          " vectors but " + std::to_string(labels.size()) + " labels");
  }
  if (vectors.rows() == 0) throw InvalidArgument(std::string(who) + ": no vectors");
  return vectors;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

Matrix centroids(const Matrix& unit, const Compact& c) {
  Matrix out(c.k(), unit.cols());
  for (std::size_t i = 0; i < unit.rows(); ++i) {
    auto dst = out.row(c.ids[i]);
    const auto src = unit.row(i);
    for (std::size_t d = 0; d < dst.size(); ++d) dst[d] += src[d];
  }
  for (std::size_t k = 0; k < c.k(); ++k) {
    for (double& x : out.row(k)) x /= static_cast<double>(c.sizes[k]);
  }
  return out;
}

}  // namespace

Matrix l2_normalized(const Matrix& vectors) {
  Matrix out = vectors;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double len = norm(out.row(i));
    if (len == 0.0) {
      throw InvalidArgument("l2_normalized: vector " + std::to_string(i) + " has zero norm");
    }
    for (double& x : out.row(i)) x /= len;
  }
  return out;
}

std::vector<std::size_t> sizes_of(Labels labels) { return compact(labels).sizes; }

ClusterStats cluster_stats(std::span<const std::size_t> sizes) {
  require_sizes(sizes, "cluster_stats");
  std::vector<std::size_t> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t k = sorted.size();
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  const double median =
      k % 2 == 1 ? static_cast<double>(sorted[k / 2])
                 : (static_cast<double>(sorted[k / 2 - 1]) + sorted[k / 2]) / 2.0;
  return {k, sorted.back(), total / static_cast<double>(k), median};
}

double gini(std::span<const std::size_t> sizes) {
  require_sizes(sizes, "gini");
  // With ascending sizes, sum_i sum_j |n_i - n_j| = 2 sum_i (2i - k + 1) n_i.
  std::vector<std::size_t> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end());
  const auto k = static_cast<double>(sorted.size());
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    weighted += (2.0 * static_cast<double>(i) - k + 1.0) * static_cast<double>(sorted[i]);
    total += static_cast<double>(sorted[i]);
  }
  if (total == 0.0) throw InvalidArgument("gini: cluster sizes must be positive");
  return 2.0 * weighted / (2.0 * k * total);
}

double coverage_top(std::span<const std::size_t> sizes, std::size_t m) {
  require_sizes(sizes, "coverage_top");
  std::vector<std::size_t> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  const auto top = static_cast<std::ptrdiff_t>(std::min(m, sorted.size()));
  const double head = std::accumulate(sorted.begin(), sorted.begin() + top, 0.0);
  return head / total;
}

double coverage_top10(std::span<const std::size_t> sizes) { return coverage_top(sizes, 10); }

std::size_t clusters_for_coverage(std::span<const std::size_t> sizes, double share) {
  require_sizes(sizes, "clusters_for_coverage");
  std::vector<std::size_t> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  double covered = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    covered += static_cast<double>(sorted[i]);
    if (covered >= share * total) return i + 1;
  }
  return sorted.size();
}

double singleton_ratio(std::span<const std::size_t> sizes) {
  require_sizes(sizes, "singleton_ratio");
  const auto ones = std::count(sizes.begin(), sizes.end(), std::size_t{1});
  return static_cast<double>(ones) / static_cast<double>(sizes.size());
}

double silhouette(const Matrix& vectors, Labels labels, unsigned threads) {
  const Matrix& unit = checked(vectors, labels, "silhouette");
  const Compact c = compact(labels);
  if (c.k() == 1) return kSilhouetteSingleCluster;
  const std::size_t n = unit.rows();

  std::vector<double> score(n, 0.0);
  parallel_for(n, threads, [&](std::size_t i) {
    const std::size_t own = c.ids[i];
    if (c.sizes[own] == 1) return;
    std::vector<double> sum(c.k(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) sum[c.ids[j]] += distance(unit.row(i), unit.row(j));
    }
    const double a = sum[own] / static_cast<double>(c.sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < c.k(); ++k) {
      if (k != own) b = std::min(b, sum[k] / static_cast<double>(c.sizes[k]));
    }
    const double denom = std::max(a, b);
    score[i] = denom > 0.0 ? (b - a) / denom : 0.0;
  });
  return std::accumulate(score.begin(), score.end(), 0.0) / static_cast<double>(n);
}

double davies_bouldin(const Matrix& vectors, Labels labels) {
  const Matrix& unit = checked(vectors, labels, "davies_bouldin");
  const Compact c = compact(labels);
  if (c.k() == 1) return kDaviesBouldinSingleCluster;
  const Matrix cent = centroids(unit, c);

  std::vector<double> spread(c.k(), 0.0);
  for (std::size_t i = 0; i < unit.rows(); ++i) {
    spread[c.ids[i]] += distance(unit.row(i), cent.row(c.ids[i]));
  }
  for (std::size_t k = 0; k < c.k(); ++k) spread[k] /= static_cast<double>(c.sizes[k]);

  double total = 0.0;
  for (std::size_t i = 0; i < c.k(); ++i) {
    double worst = 0.0;
    for (std::size_t j = 0; j < c.k(); ++j) {
      if (j == i) continue;
      const double d = distance(cent.row(i), cent.row(j));
      // Coincident centroids contribute nothing (infinite separation
      // convention).
      if (d > 0.0) worst = std::max(worst, (spread[i] + spread[j]) / d);
    }
    total += worst;
  }
  return total / static_cast<double>(c.k());
}

double calinski_harabasz(const Matrix& vectors, Labels labels) {
  const Matrix& unit = checked(vectors, labels, "calinski_harabasz");
  const Compact c = compact(labels);
  const std::size_t n = unit.rows();
  const std::size_t k = c.k();
  if (k < 2 || k > n - 1) return kCalinskiHarabaszDegenerate;

  const Matrix cent = centroids(unit, c);
  std::vector<double> grand(unit.cols(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < grand.size(); ++d) grand[d] += unit(i, d);
  }
  for (double& x : grand) x /= static_cast<double>(n);

  double between = 0.0;
  for (std::size_t q = 0; q < k; ++q) {
    const double d = distance(cent.row(q), grand);
    between += static_cast<double>(c.sizes[q]) * d * d;
  }
  double within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = distance(unit.row(i), cent.row(c.ids[i]));
    within += d * d;
  }
  if (within == 0.0) return kCalinskiHarabaszUnbounded;
  return (between / static_cast<double>(k - 1)) / (within / static_cast<double>(n - k));
}

double composite_score(const CompositeInputs& in) {
  const double s = (in.silhouette + 1.0) / 2.0;
  const double ch = std::min(std::log1p(in.calinski_harabasz) / 10.0, 1.0);
  const double db = 1.0 - std::min(in.davies_bouldin / 5.0, 1.0);
  return 0.3 * s + 0.2 * ch + 0.2 * db + 0.1 * (1.0 - in.gini) +
         0.1 * in.coverage_top10 + 0.1 * (1.0 - in.singleton_ratio);
}

MetricsReport evaluate(const Matrix& vectors, Labels labels, unsigned threads) {
  MetricsReport r;
  r.sizes = sizes_of(labels);
  std::sort(r.sizes.begin(), r.sizes.end(), std::greater<>());
  r.stats = cluster_stats(r.sizes);
  r.gini = gini(r.sizes);
  r.coverage_top10 = coverage_top10(r.sizes);
  r.singleton_ratio = singleton_ratio(r.sizes);
  const Matrix unit = l2_normalized(vectors);
  r.silhouette = silhouette(unit, labels, threads);
  r.davies_bouldin = davies_bouldin(unit, labels);
  r.calinski_harabasz = calinski_harabasz(unit, labels);
  r.overall = composite_score({r.silhouette, r.davies_bouldin, r.calinski_harabasz, r.gini,
                               r.coverage_top10, r.singleton_ratio});
  return r;
}

std::optional<double> chi_square(const std::vector<std::vector<double>>& table) {
  std::vector<double> row_sum;
  std::vector<std::size_t> kept_rows;
  const std::size_t cols = table.empty() ? 0 : table.front().size();
  std::vector<double> col_sum(cols, 0.0);
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table[i].size() != cols) throw InvalidArgument("chi_square: ragged table");
    const double s = std::accumulate(table[i].begin(), table[i].end(), 0.0);
    if (s > 0.0) {
      kept_rows.push_back(i);
      row_sum.push_back(s);
      for (std::size_t j = 0; j < cols; ++j) col_sum[j] += table[i][j];
    }
  }
  std::vector<std::size_t> kept_cols;
  for (std::size_t j = 0; j < cols; ++j) {
    if (col_sum[j] > 0.0) kept_cols.push_back(j);
  }
  if (kept_rows.size() < 2 || kept_cols.size() < 2) return std::nullopt;

  const double total = std::accumulate(row_sum.begin(), row_sum.end(), 0.0);
  double stat = 0.0;
  for (std::size_t r = 0; r < kept_rows.size(); ++r) {
    for (std::size_t j : kept_cols) {
      const double expected = row_sum[r] * col_sum[j] / total;
      const double diff = table[kept_rows[r]][j] - expected;
      stat += diff * diff / expected;
    }
  }
  return stat;
}

ChiSquareResult chi_square_temporal(Labels labels, std::span<const int> years) {
  if (labels.size() != years.size()) {
    throw InvalidArgument("chi_square_temporal: labels and years differ in length");
  }
  const Compact c = compact(labels);
  std::vector<int> distinct_years(years.begin(), years.end());
  std::sort(distinct_years.begin(), distinct_years.end());
  distinct_years.erase(std::unique(distinct_years.begin(), distinct_years.end()),
                       distinct_years.end());

  std::vector<std::vector<double>> table(c.k(),
                                         std::vector<double>(distinct_years.size(), 0.0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto col = static_cast<std::size_t>(
        std::lower_bound(distinct_years.begin(), distinct_years.end(), years[i]) -
        distinct_years.begin());
    table[c.ids[i]][col] += 1.0;
  }

  ChiSquareResult r;
  r.statistic = chi_square(table);
  r.rows = c.k();
  r.cols = distinct_years.size();
  for (std::size_t q = 0; q < c.k(); ++q) {
    const double top = *std::max_element(table[q].begin(), table[q].end());
    const double share = top / static_cast<double>(c.sizes[q]);
    r.concentration.push_back(share);
    r.flagged.push_back(share > kConcentrationThreshold);
  }
  return r;
}

CentroidSimilarity centroid_similarity(const Matrix& vectors, Labels labels) {
  const Matrix& unit = checked(vectors, labels, "centroid_similarity");
  const Compact c = compact(labels);
  if (c.k() < 2) throw InvalidArgument("centroid_similarity: need at least 2 clusters");
  const Matrix cent = centroids(unit, c);
  for (std::size_t q = 0; q < c.k(); ++q) {
    if (norm(cent.row(q)) == 0.0) {
      throw InvalidArgument("centroid_similarity: centroid " + std::to_string(q) +
                            " has zero norm");
    }
  }

  CentroidSimilarity out;
  out.k = c.k();
  out.matrix.assign(c.k() * c.k(), 0.0);
  out.max_off_diagonal = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (std::size_t i = 0; i < c.k(); ++i) {
    out.matrix[i * c.k() + i] = 1.0;
    for (std::size_t j = i + 1; j < c.k(); ++j) {
      const double s = cosine(cent.row(i), cent.row(j));
      out.matrix[i * c.k() + j] = out.matrix[j * c.k() + i] = s;
      sum += s;
      out.max_off_diagonal = std::max(out.max_off_diagonal, s);
      if (s > kMergeCandidateThreshold) out.merge_candidates.emplace_back(i, j);
    }
  }
  out.mean_off_diagonal = sum / static_cast<double>(c.k() * (c.k() - 1) / 2);
  return out;
}

double variation_of_information(Labels a, Labels b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("variation_of_information: label arrays differ in length");
  }
  if (a.empty()) throw InvalidArgument("variation_of_information: empty labelings");
  const Compact ca = compact(a);
  const Compact cb = compact(b);
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> joint;
  for (std::size_t i = 0; i < a.size(); ++i) ++joint[{ca.ids[i], cb.ids[i]}];

  // VI = -sum p_ab [ln(p_ab / p_a) + ln(p_ab / p_b)], a sum of non-negative
  // terms equal to H(A) + H(B) - 2 I(A;B).
  // Terms are summed in sorted order so that swapping a and b gives a
  // bit-identical result.
  const auto n = static_cast<double>(a.size());
  std::vector<double> terms;
  terms.reserve(joint.size());
  for (const auto& [key, count] : joint) {
    const double p = static_cast<double>(count) / n;
    terms.push_back(-p * (std::log(static_cast<double>(count) / ca.sizes[key.first]) +
                          std::log(static_cast<double>(count) / cb.sizes[key.second])));
  }
  std::sort(terms.begin(), terms.end());
  double vi = 0.0;
  for (double t : terms) vi += t;
  return vi;
}

std::vector<std::vector<double>> overlap_matrix(Labels a, Labels b) {
  if (a.size() != b.size()) {
    throw InvalidArgument("overlap_matrix: label arrays differ in length");
  }
  const Compact ca = compact(a);
  const Compact cb = compact(b);
  std::vector<std::vector<double>> out(ca.k(), std::vector<double>(cb.k(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i) out[ca.ids[i]][cb.ids[i]] += 1.0;
  for (std::size_t r = 0; r < ca.k(); ++r) {
    for (double& x : out[r]) x = 100.0 * x / static_cast<double>(ca.sizes[r]);
  }
  return out;
}

}  // namespace mcvc::metrics
