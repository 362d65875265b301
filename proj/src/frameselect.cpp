#include "mcvc/frameselect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mcvc::frameselect {

void SelectionParams::validate() const {
  if (!(fps > 0.0) || !std::isfinite(fps)) throw InvalidArgument("fps must be positive");
  if (n_min == 0 || n_min > n_max) {
    throw InvalidArgument("require 0 < n_min <= n_max");
  }
  for (double t : {black_low, bright_high, gray_std_min}) {
    if (!(t >= 0.0 && t <= 255.0)) {
      throw InvalidArgument("validation thresholds must lie in [0, 255]");
    }
  }
}

std::string_view to_string(Mode mode) {
  return mode == Mode::kStatic ? "static" : "dynamic";
}

Mode parse_mode(std::string_view text) {
  if (text == "static") return Mode::kStatic;
  if (text == "dynamic") return Mode::kDynamic;
  throw InvalidArgument("unknown selection mode '" + std::string(text) + "'");
}

std::string_view to_string(FrameIssue issue) {
  switch (issue) {
    case FrameIssue::kUniform: return "uniform";
    case FrameIssue::kDark: return "dark";
    case FrameIssue::kOverexposed: return "overexposed";
    case FrameIssue::kCorrupted: return "corrupted";
  }
  return "unknown";
}

std::size_t plan_sample_count(double duration_s, const SelectionParams& params) {
  params.validate();
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw InvalidArgument("plan_sample_count: duration must be positive");
  }
  const double raw = std::floor(duration_s * params.fps);
  const auto n = raw >= static_cast<double>(params.n_max)
                     ? params.n_max
                     : static_cast<std::size_t>(raw);
  return std::min(std::max(n, params.n_min), params.n_max);
}

std::vector<std::size_t> static_indices(std::size_t total, std::size_t n) {
  if (total == 0) throw InvalidArgument("static_indices: video has no frames");
  if (n == 0) throw InvalidArgument("static_indices: n must be >= 1");
  n = std::min(n, total);
  if (n == 1) return {0};
  std::vector<std::size_t> out;
  out.reserve(n);
  const auto span = static_cast<std::uint64_t>(total - 1);
  for (std::uint64_t i = 0; i < n; ++i) {
    out.push_back(static_cast<std::size_t>(i * span / (n - 1)));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::optional<FrameIssue> validate_frame(const embstore::FrameRecord& frame,
                                         const SelectionParams& params) {
  if (frame.gray_std < params.gray_std_min) return FrameIssue::kUniform;
  if (frame.brightness < params.black_low) return FrameIssue::kDark;
  if (frame.brightness > params.bright_high) return FrameIssue::kOverexposed;
  if (frame.corrupted) return FrameIssue::kCorrupted;
  return std::nullopt;
}

std::optional<std::size_t> repair_index(std::size_t idx, const std::vector<bool>& valid,
                                        std::size_t window) {
  if (idx >= valid.size()) throw InvalidArgument("repair_index: idx out of range");
  if (valid[idx]) return idx;
  for (std::size_t d = 1; d <= window; ++d) {
    if (d <= idx && valid[idx - d]) return idx - d;
    if (idx + d < valid.size() && valid[idx + d]) return idx + d;
  }
  return std::nullopt;
}

std::vector<std::size_t> diverse_indices(const Matrix& descriptors, std::size_t n) {
  const std::size_t count = descriptors.rows();
  if (count == 0) throw InvalidArgument("diverse_indices: no descriptors");
  if (n == 0) throw InvalidArgument("diverse_indices: n must be >= 1");
  n = std::min(n, count);

  std::vector<double> norms(count);
  for (std::size_t i = 0; i < count; ++i) {
    norms[i] = norm(descriptors.row(i));
    if (norms[i] == 0.0) {
      throw InvalidArgument("diverse_indices: zero-norm descriptor at row " +
                            std::to_string(i));
    }
  }
  auto distance = [&](std::size_t a, std::size_t b) {
    return 1.0 - dot(descriptors.row(a), descriptors.row(b)) / (norms[a] * norms[b]);
  };

  std::vector<bool> taken(count, false);
  std::vector<double> min_dist(count, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> picked{0};
  taken[0] = true;
  while (picked.size() < n) {
    const std::size_t last = picked.back();
    std::size_t best = count;
    for (std::size_t i = 0; i < count; ++i) {
      if (taken[i]) continue;
      min_dist[i] = std::min(min_dist[i], distance(i, last));
      if (best == count || min_dist[i] > min_dist[best]) best = i;
    }
    taken[best] = true;
    picked.push_back(best);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

SelectionPlan plan_video(const embstore::EmbeddingStore& store,
                         const embstore::VideoEntry& video, Mode mode,
                         const SelectionParams& params) {
  SelectionPlan plan{video.video_id, mode, {}, {}};
  const auto& frames = video.frames;
  if (frames.empty()) return plan;

  const std::size_t n = plan_sample_count(video.duration_s, params);
  std::vector<bool> valid(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) {
    valid[i] = !validate_frame(frames[i], params).has_value();
  }

  std::vector<std::size_t> positions;
  if (mode == Mode::kStatic) {
    for (std::size_t p : static_indices(frames.size(), n)) {
      if (auto fixed = repair_index(p, valid, params.repair_window)) {
        positions.push_back(*fixed);
      } else {
        plan.skipped.push_back(frames[p].index);
      }
    }
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
  } else {
    std::vector<embstore::FrameRecord> usable;
    std::vector<std::size_t> usable_pos;
    for (std::size_t i = 0; i < frames.size(); ++i) {
      if (valid[i]) {
        usable.push_back(frames[i]);
        usable_pos.push_back(i);
      }
    }
    if (!usable.empty()) {
      for (std::size_t k : diverse_indices(embstore::gather(store, usable), n)) {
        positions.push_back(usable_pos[k]);
      }
    }
  }
  for (std::size_t p : positions) plan.indices.push_back(frames[p].index);
  return plan;
}

std::vector<SelectionPlan> plan_store(const embstore::EmbeddingStore& store, Mode mode,
                                      const SelectionParams& params) {
  params.validate();
  std::vector<SelectionPlan> plans;
  plans.reserve(store.manifest.size());
  for (const auto& v : store.manifest) plans.push_back(plan_video(store, v, mode, params));
  return plans;
}

}  // namespace mcvc::frameselect
