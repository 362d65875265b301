#pragma once

// Clustering validity statistics, the weighted composite score, and tools for
// comparing two clusterings of the same videos.

#include <cstddef>
#include <optional>
#include <utility>
#include <span>
#include <vector>

#include "mcvc/matrix.hpp"

namespace mcvc::metrics {

using Labels = std::span<const std::size_t>;

// Sentinels for degenerate partitions.
inline constexpr double kSilhouetteSingleCluster = -1.0;
inline constexpr double kDaviesBouldinSingleCluster = 10.0;
inline constexpr double kCalinskiHarabaszDegenerate = 0.0;
inline constexpr double kCalinskiHarabaszUnbounded = 1e12;

inline constexpr double kConcentrationThreshold = 0.5;
inline constexpr double kMergeCandidateThreshold = 0.9;

struct ClusterStats {
  std::size_t k = 0;
  std::size_t largest = 0;
  double mean = 0.0;
  double median = 0.0;
};

ClusterStats cluster_stats(std::span<const std::size_t> sizes);

// sum_i sum_j |n_i - n_j| / (2 k sum_i n_i).
double gini(std::span<const std::size_t> sizes);

// Share of all items held by the (up to) ten largest clusters.
double coverage_top10(std::span<const std::size_t> sizes);

// Share of all items held by the (up to) m largest clusters.
double coverage_top(std::span<const std::size_t> sizes, std::size_t m);

// Smallest number of largest clusters that together hold at least `share`
// of all items.
std::size_t clusters_for_coverage(std::span<const std::size_t> sizes, double share);

// Fraction of clusters with exactly one member.
double singleton_ratio(std::span<const std::size_t> sizes);

// Sizes of the distinct labels, in ascending label order.
std::vector<std::size_t> sizes_of(Labels labels);

// Rows scaled to unit length; throws on a zero row.
Matrix l2_normalized(const Matrix& vectors);

// Geometric indices use Euclidean distance on the rows exactly as given.
// `threads` only affects speed.
double silhouette(const Matrix& vectors, Labels labels, unsigned threads = 1);
double davies_bouldin(const Matrix& vectors, Labels labels);
double calinski_harabasz(const Matrix& vectors, Labels labels);

struct CompositeInputs {
  double silhouette = 0.0;
  double davies_bouldin = 0.0;
  double calinski_harabasz = 0.0;
  double gini = 0.0;
  double coverage_top10 = 0.0;
  double singleton_ratio = 0.0;
};

// 0.3 (s+1)/2 + 0.2 min(ln(1+CH)/10, 1) + 0.2 (1 - min(DB/5, 1))
//   + 0.1 (1-G) + 0.1 C10 + 0.1 (1-R_s)
double composite_score(const CompositeInputs& in);

struct MetricsReport {
  ClusterStats stats;
  std::vector<std::size_t> sizes;  // descending
  double gini = 0.0;
  double coverage_top10 = 0.0;
  double singleton_ratio = 0.0;
  double silhouette = 0.0;
  double davies_bouldin = 0.0;
  double calinski_harabasz = 0.0;
  double overall = 0.0;
};

// Full report. The geometric indices are computed on l2_normalized(vectors).
MetricsReport evaluate(const Matrix& vectors, Labels labels, unsigned threads = 1);

struct ChiSquareResult {
  std::optional<double> statistic;  // nullopt with fewer than 2 rows or columns
  std::size_t rows = 0;             // non-empty clusters
  std::size_t cols = 0;             // non-empty years
  std::vector<double> concentration;  // per cluster, max single-year share
  std::vector<bool> flagged;          // concentration > 0.5
};

// Pearson chi-square over the cluster x year contingency table (no Yates
// correction). Rows follow ascending label, columns ascending year.
ChiSquareResult chi_square_temporal(Labels labels, std::span<const int> years);

// Pearson statistic for an arbitrary contingency table; empty rows and
// columns are dropped first. nullopt with fewer than 2 non-empty rows/columns.
std::optional<double> chi_square(const std::vector<std::vector<double>>& table);

struct CentroidSimilarity {
  std::size_t k = 0;
  std::vector<double> matrix;  // k x k cosine similarities
  std::vector<std::pair<std::size_t, std::size_t>> merge_candidates;  // sim > 0.9
  double mean_off_diagonal = 0.0;
  double max_off_diagonal = 0.0;
};

// Cosine similarity between cluster centroids. Requires k >= 2.
CentroidSimilarity centroid_similarity(const Matrix& vectors, Labels labels);

// H(A) + H(B) - 2 I(A;B), natural logarithm.
double variation_of_information(Labels a, Labels b);

// Row-normalized percentages: entry (i, j) is the share of A-cluster i that
// lands in B-cluster j. Rows and columns follow the distinct labels of a and b
// in ascending order.
std::vector<std::vector<double>> overlap_matrix(Labels a, Labels b);

}  // namespace mcvc::metrics
