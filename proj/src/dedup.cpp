#include "mcvc/dedup.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace mcvc::dedup {

BoundaryFrames boundary_frames(std::span<const embstore::FrameRecord> frames,
                               double black_threshold) {
  if (frames.empty()) throw InvalidArgument("boundary_frames: empty frame list");
  auto bright = [&](const embstore::FrameRecord& f) {
    return f.brightness > black_threshold;
  };
  const auto first = std::find_if(frames.begin(), frames.end(), bright);
  if (first == frames.end()) return {0, frames.size() - 1, true};
  const auto last = std::find_if(frames.rbegin(), frames.rend(), bright);
  return {static_cast<std::size_t>(first - frames.begin()),
          static_cast<std::size_t>(frames.rend() - last - 1), false};
}

std::uint64_t frame_hash(std::span<const std::uint8_t> luma8x8) {
  if (luma8x8.size() != 64) {
    throw InvalidArgument("frame_hash: expected 64 bytes, got " +
                          std::to_string(luma8x8.size()));
  }
  // Compare 64*x against the sum to stay in integers.
  const unsigned sum = std::accumulate(luma8x8.begin(), luma8x8.end(), 0u);
  std::uint64_t hash = 0;
  for (std::size_t b = 0; b < 64; ++b) {
    if (64u * luma8x8[b] > sum) hash |= std::uint64_t{1} << (63 - b);
  }
  return hash;
}

VideoHash hash_video(const embstore::VideoEntry& video, double black_threshold) {
  if (video.frames.empty()) {
    throw InvalidArgument("hash_video: video " + video.video_id + " has no frames");
  }
  const auto ends = boundary_frames(video.frames, black_threshold);
  return {video.video_id, frame_hash(video.frames[ends.first].luma8x8),
          frame_hash(video.frames[ends.last].luma8x8), video.posted_at, ends.all_black};
}

DedupReport mark_duplicates(std::span<const VideoHash> hashes) {
  DedupReport report;
  report.videos = hashes.size();

  std::map<std::pair<std::uint64_t, std::uint64_t>, std::vector<const VideoHash*>> groups;
  for (const auto& h : hashes) {
    groups[{h.first_hash, h.last_hash}].push_back(&h);
    if (h.all_black) report.all_black.push_back(h.video_id);
  }
  std::sort(report.all_black.begin(), report.all_black.end());

  auto earlier = [](const VideoHash* a, const VideoHash* b) {
    const auto ta = embstore::posted_epoch_seconds(a->posted_at);
    const auto tb = embstore::posted_epoch_seconds(b->posted_at);
    if (ta != tb) return ta < tb;
    return a->video_id < b->video_id;
  };
  for (auto& [key, members] : groups) {
    const VideoHash* original = *std::min_element(members.begin(), members.end(), earlier);
    report.originals.insert(original->video_id);
    if (members.size() > 1) ++report.groups;
    for (const VideoHash* m : members) {
      if (m->video_id != original->video_id) report.duplicates[m->video_id] = original->video_id;
    }
  }
  return report;
}

DedupReport dedup_store(const embstore::EmbeddingStore& store, double black_threshold) {
  std::vector<VideoHash> hashes;
  hashes.reserve(store.manifest.size());
  for (const auto& v : store.manifest) hashes.push_back(hash_video(v, black_threshold));
  return mark_duplicates(hashes);
}

}  // namespace mcvc::dedup
