#pragma once

// Planted-partition embedding stores for tests and demos. Each video belongs
// to one Gaussian blob; its frames scatter around a per-video vector.

#include <cstdint>
#include <string>
#include <vector>

#include "mcvc/embstore.hpp"

namespace mcvc::synth {

struct SynthParams {
  std::size_t videos = 200;
  std::size_t clusters = 4;
  std::uint32_t dim = 32;
  double sigma = 0.3;          // per-coordinate spread of videos around their blob
  double frame_sigma = 0.1;    // per-coordinate spread of frames around their video
  double common_scale = 1.0;   // weight of the direction shared by all blobs
  double min_separation = 6.0; // minimum blob-center distance, in units of sigma
  double invalid_fraction = 0.05;  // frames made too dark to use
  std::size_t duplicates = 0;      // extra re-uploads of existing videos
  double source_fps = 30.0;
  double min_duration_s = 4.0;
  double max_duration_s = 30.0;
  std::uint64_t seed = 1;
};

struct SynthStore {
  embstore::EmbeddingStore store;
  std::vector<std::size_t> planted;  // blob per manifest entry
};

// Deterministic for a given SynthParams (including seed).
SynthStore generate(const SynthParams& params);

}  // namespace mcvc::synth
