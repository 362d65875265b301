#pragma once

// Exact duplicate detection on first/last non-black frame fingerprints.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "mcvc/embstore.hpp"

namespace mcvc::dedup {

inline constexpr double kDefaultBlackThreshold = 5.0;

struct BoundaryFrames {
  std::size_t first = 0;
  std::size_t last = 0;
  bool all_black = false;  // no frame above the threshold; literal ends used
};

// Positions (into `frames`) of the first and last frame brighter than
// black_threshold.
BoundaryFrames boundary_frames(std::span<const embstore::FrameRecord> frames,
                               double black_threshold = kDefaultBlackThreshold);

// 64-bit average hash of an 8x8 luma thumbnail. Bit b (row-major, bit 0 is the
// most significant) is set iff luma[b] is strictly above the thumbnail mean.
std::uint64_t frame_hash(std::span<const std::uint8_t> luma8x8);

struct VideoHash {
  std::string video_id;
  std::uint64_t first_hash = 0;
  std::uint64_t last_hash = 0;
  std::string posted_at;
  bool all_black = false;
};

VideoHash hash_video(const embstore::VideoEntry& video,
                     double black_threshold = kDefaultBlackThreshold);

struct DedupReport {
  std::set<std::string> originals;
  std::map<std::string, std::string> duplicates;  // duplicate -> original
  std::vector<std::string> all_black;             // videos hashed on black frames
  std::size_t videos = 0;
  std::size_t groups = 0;  // hash groups with more than one member
};

// Groups videos whose first and last hashes are both equal. The earliest
// posted_at in a group is the original; ties go to the smallest video_id.
DedupReport mark_duplicates(std::span<const VideoHash> hashes);

DedupReport dedup_store(const embstore::EmbeddingStore& store,
                        double black_threshold = kDefaultBlackThreshold);

}  // namespace mcvc::dedup
