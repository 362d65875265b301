#pragma once

// Frame-to-video embedding aggregation. Every method maps an N x d matrix of
// frame embeddings (one row per frame, temporal order) to one d-vector.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcvc/matrix.hpp"

namespace mcvc::combine {

enum class Method {
  kAverage,
  kMaxConfidence,
  kWeightedDiversity,
  kWeightedConfidence,
  kTemporalCoherence,
};

std::string_view to_string(Method method);
Method parse_method(std::string_view text);
bool needs_confidence(Method method);

struct CombineParams {
  Method method = Method::kAverage;
  double tau = 2.0;
  std::size_t radius = 1;

  // Defaults used for a method: tau 1.0 for temporal coherence, 2.0 otherwise.
  static CombineParams defaults_for(Method method);
  void validate() const;
};

struct VideoEmbedding {
  std::string video_id;
  std::vector<double> vector;
  Method method = Method::kAverage;
  std::vector<double> weights;  // empty for average and max-confidence
};

// Softmax of scores / tau with the max subtracted first.
std::vector<double> softmax_weights(std::span<const double> scores, double tau);

VideoEmbedding combine_average(const Matrix& frames);
VideoEmbedding combine_max_confidence(const Matrix& frames,
                                      std::span<const double> confidences);
VideoEmbedding combine_weighted_diversity(const Matrix& frames, double tau);
VideoEmbedding combine_weighted_confidence(const Matrix& frames,
                                           std::span<const double> confidences,
                                           double tau);
VideoEmbedding combine_temporal_coherence(const Matrix& frames, std::size_t radius,
                                          double tau);

// Dispatches on params.method. Confidence-based methods require `confidences`
// with one entry per frame.
VideoEmbedding combine(const Matrix& frames,
                       const std::optional<std::vector<double>>& confidences,
                       const CombineParams& params);

// Per-frame scores used by the weighted methods, exposed for inspection.
std::vector<double> diversity_scores(const Matrix& frames);
std::vector<double> coherence_scores(const Matrix& frames, std::size_t radius);

}  // namespace mcvc::combine
