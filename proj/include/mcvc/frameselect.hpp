#pragma once

// Frame sampling plans: how many frames to take from a video, which ones, and
// how to step around frames that are unusable (flat, too dark, blown out).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mcvc/embstore.hpp"
#include "mcvc/matrix.hpp"

namespace mcvc::frameselect {

struct SelectionParams {
  double fps = 1.0;
  std::size_t n_min = 4;
  std::size_t n_max = 100;
  double black_low = 5.0;
  double bright_high = 250.0;
  double gray_std_min = 10.0;
  std::size_t repair_window = 5;

  // Throws InvalidArgument unless 0 < n_min <= n_max, fps > 0 and the
  // thresholds lie in [0, 255].
  void validate() const;
};

enum class Mode { kStatic, kDynamic };

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view text);

enum class FrameIssue { kUniform, kDark, kOverexposed, kCorrupted };

std::string_view to_string(FrameIssue issue);

struct SelectionPlan {
  std::string video_id;
  Mode mode = Mode::kStatic;
  std::vector<std::int64_t> indices;  // source frame indices, sorted, unique
  std::vector<std::int64_t> skipped;  // planned positions with no usable frame nearby

  friend bool operator==(const SelectionPlan&, const SelectionPlan&) = default;
};

// n = min(max(floor(duration_s * fps), n_min), n_max).
std::size_t plan_sample_count(double duration_s, const SelectionParams& params);

// n evenly spaced indices floor(i * (T-1) / (n-1)) over [0, T). n is clamped
// to T; n == 1 yields {0}.
std::vector<std::size_t> static_indices(std::size_t total, std::size_t n);

// nullopt when the frame is usable, otherwise the first failed check in the
// order uniform, dark, overexposed, corrupted.
std::optional<FrameIssue> validate_frame(const embstore::FrameRecord& frame,
                                         const SelectionParams& params);

// Nearest valid position within +/- window of idx (earlier frame on ties),
// idx itself when valid, nullopt when the window holds no valid frame.
std::optional<std::size_t> repair_index(std::size_t idx, const std::vector<bool>& valid,
                                        std::size_t window = 5);

// Farthest-point sampling under cosine distance, seeded at row 0. Ties go to
// the smallest row. Result is sorted.
std::vector<std::size_t> diverse_indices(const Matrix& descriptors, std::size_t n);

// Plans one video over the frames present in the store. Positions produced by
// the sampling formulas index the stored frame list; the plan reports the
// corresponding source frame indices.
SelectionPlan plan_video(const embstore::EmbeddingStore& store,
                         const embstore::VideoEntry& video, Mode mode,
                         const SelectionParams& params);

std::vector<SelectionPlan> plan_store(const embstore::EmbeddingStore& store, Mode mode,
                                      const SelectionParams& params);

}  // namespace mcvc::frameselect
