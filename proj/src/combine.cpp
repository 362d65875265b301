#include "mcvc/combine.hpp"

#include <algorithm>
#include <cmath>

namespace mcvc::combine {

namespace {

void require_frames(const Matrix& frames, const char* who) {
  if (frames.rows() == 0) throw InvalidArgument(std::string(who) + ": no frames");
}

void require_confidences(const Matrix& frames, std::span<const double> conf,
                         const char* who) {
  if (conf.size() != frames.rows()) {
    throw InvalidArgument(std::string(who) + ": need one confidence per frame");
  }
}

// Unit-normalized copies of the frame rows; cosine similarity is then a dot.
Matrix unit_rows(const Matrix& frames, const char* who) {
  Matrix out = frames;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double n = norm(out.row(i));
    if (n == 0.0 || !std::isfinite(n)) {
      throw InvalidArgument(std::string(who) + ": frame " + std::to_string(i) +
                            " has zero norm");
    }
    for (double& x : out.row(i)) x /= n;
  }
  return out;
}

std::vector<double> weighted_sum(const Matrix& frames, std::span<const double> w) {
  std::vector<double> v(frames.cols(), 0.0);
  for (std::size_t i = 0; i < frames.rows(); ++i) {
    const auto r = frames.row(i);
    for (std::size_t c = 0; c < v.size(); ++c) v[c] += w[i] * r[c];
  }
  return v;
}

VideoEmbedding weighted(const Matrix& frames, std::vector<double> weights, Method m) {
  VideoEmbedding out;
  out.vector = weighted_sum(frames, weights);
  out.method = m;
  out.weights = std::move(weights);
  return out;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kAverage: return "average";
    case Method::kMaxConfidence: return "max_confidence";
    case Method::kWeightedDiversity: return "weighted_diversity";
    case Method::kWeightedConfidence: return "weighted_confidence";
    case Method::kTemporalCoherence: return "temporal_coherence";
  }
  return "unknown";
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::kAverage, Method::kMaxConfidence, Method::kWeightedDiversity,
                   Method::kWeightedConfidence, Method::kTemporalCoherence}) {
    if (text == to_string(m)) return m;
  }
  throw InvalidArgument("unknown combination method '" + std::string(text) + "'");
}

bool needs_confidence(Method method) {
  return method == Method::kMaxConfidence || method == Method::kWeightedConfidence;
}

CombineParams CombineParams::defaults_for(Method method) {
  return {method, method == Method::kTemporalCoherence ? 1.0 : 2.0, 1};
}

void CombineParams::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw InvalidArgument("tau must be > 0");
  if (radius < 1) throw InvalidArgument("radius must be >= 1");
}

std::vector<double> softmax_weights(std::span<const double> scores, double tau) {
  if (scores.empty()) throw InvalidArgument("softmax_weights: empty scores");
  if (!(tau > 0.0)) throw InvalidArgument("softmax_weights: tau must be > 0");
  const double top = *std::max_element(scores.begin(), scores.end());
  if (!std::isfinite(top)) throw InvalidArgument("softmax_weights: non-finite score");
  std::vector<double> w(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw InvalidArgument("softmax_weights: non-finite score");
    }
    w[i] = std::exp((scores[i] - top) / tau);
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

VideoEmbedding combine_average(const Matrix& frames) {
  require_frames(frames, "combine_average");
  VideoEmbedding out;
  out.method = Method::kAverage;
  out.vector.assign(frames.cols(), 0.0);
  for (std::size_t i = 0; i < frames.rows(); ++i) {
    const auto r = frames.row(i);
    for (std::size_t c = 0; c < r.size(); ++c) out.vector[c] += r[c];
  }
  for (double& x : out.vector) x /= static_cast<double>(frames.rows());
  return out;
}

VideoEmbedding combine_max_confidence(const Matrix& frames,
                                      std::span<const double> confidences) {
  require_frames(frames, "combine_max_confidence");
  require_confidences(frames, confidences, "combine_max_confidence");
  const auto best = static_cast<std::size_t>(
      std::max_element(confidences.begin(), confidences.end()) - confidences.begin());
  VideoEmbedding out;
  out.method = Method::kMaxConfidence;
  out.vector.assign(frames.row(best).begin(), frames.row(best).end());
  return out;
}

std::vector<double> diversity_scores(const Matrix& frames) {
  require_frames(frames, "diversity_scores");
  const std::size_t n = frames.rows();
  if (n == 1) return {0.0};
  const Matrix unit = unit_rows(frames, "combine_weighted_diversity");
  Matrix sim(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      sim(i, j) = sim(j, i) = dot(unit.row(i), unit.row(j));
    }
  }
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) mean += sim(i, j);
    }
    mean /= static_cast<double>(n - 1);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) var += (sim(i, j) - mean) * (sim(i, j) - mean);
    }
    d[i] = var / static_cast<double>(n - 1);
  }
  return d;
}

VideoEmbedding combine_weighted_diversity(const Matrix& frames, double tau) {
  return weighted(frames, softmax_weights(diversity_scores(frames), tau),
                  Method::kWeightedDiversity);
}

VideoEmbedding combine_weighted_confidence(const Matrix& frames,
                                           std::span<const double> confidences,
                                           double tau) {
  require_frames(frames, "combine_weighted_confidence");
  require_confidences(frames, confidences, "combine_weighted_confidence");
  return weighted(frames, softmax_weights(confidences, tau), Method::kWeightedConfidence);
}

std::vector<double> coherence_scores(const Matrix& frames, std::size_t radius) {
  require_frames(frames, "coherence_scores");
  if (radius < 1) throw InvalidArgument("coherence_scores: radius must be >= 1");
  const std::size_t n = frames.rows();
  if (n == 1) return {0.0};
  const Matrix unit = unit_rows(frames, "combine_temporal_coherence");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= radius ? i - radius : 0;
    const std::size_t hi = std::min(n - 1, i + radius);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i) sum += dot(unit.row(i), unit.row(j));
    }
    t[i] = sum / static_cast<double>(hi - lo);
  }
  return t;
}

VideoEmbedding combine_temporal_coherence(const Matrix& frames, std::size_t radius,
                                          double tau) {
  return weighted(frames, softmax_weights(coherence_scores(frames, radius), tau),
                  Method::kTemporalCoherence);
}

VideoEmbedding combine(const Matrix& frames,
                       const std::optional<std::vector<double>>& confidences,
                       const CombineParams& params) {
  params.validate();
  if (needs_confidence(params.method) && !confidences) {
    throw InvalidArgument(std::string(to_string(params.method)) +
                          " requires classifier confidence for every frame");
  }
  switch (params.method) {
    case Method::kAverage: return combine_average(frames);
    case Method::kMaxConfidence: return combine_max_confidence(frames, *confidences);
    case Method::kWeightedDiversity: return combine_weighted_diversity(frames, params.tau);
    case Method::kWeightedConfidence:
      return combine_weighted_confidence(frames, *confidences, params.tau);
    case Method::kTemporalCoherence:
      return combine_temporal_coherence(frames, params.radius, params.tau);
  }
  throw InvalidArgument("unknown combination method");
}

}  // namespace mcvc::combine
