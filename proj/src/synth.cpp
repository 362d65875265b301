#include "mcvc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace mcvc::synth {

namespace {

std::vector<double> gaussian_vector(std::mt19937_64& rng, std::size_t dim, double scale) {
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(dim);
  for (double& x : v) x = normal(rng);
  return v;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

std::string timestamp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> year(2019, 2023);
  std::uniform_int_distribution<int> month(1, 12);
  std::uniform_int_distribution<int> day(1, 28);
  std::uniform_int_distribution<int> hour(0, 23);
  std::uniform_int_distribution<int> minute(0, 59);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:00Z", year(rng), month(rng),
                day(rng), hour(rng), minute(rng));
  return buf;
}

}  // namespace

SynthStore generate(const SynthParams& p) {
  if (p.clusters == 0 || p.dim == 0) {
    throw InvalidArgument("synth: clusters and dim must be positive");
  }
  if (!(p.min_duration_s > 0.0) || p.max_duration_s < p.min_duration_s) {
    throw InvalidArgument("synth: bad duration range");
  }
  std::mt19937_64 rng(p.seed);

  const auto common = gaussian_vector(rng, p.dim, p.common_scale);
  std::vector<std::vector<double>> centers;
  for (std::size_t attempt = 0; centers.size() < p.clusters; ++attempt) {
    if (attempt > 10000) throw InvalidArgument("synth: cannot place separated blobs");
    auto c = gaussian_vector(rng, p.dim, 1.0);
    const bool far = std::all_of(centers.begin(), centers.end(), [&](const auto& o) {
      return distance(c, o) >= p.min_separation * p.sigma;
    });
    if (far) centers.push_back(std::move(c));
  }

  SynthStore out;
  auto& store = out.store;
  store.dim = p.dim;
  store.backbone_tag = "synthetic";

  std::uniform_real_distribution<double> duration(p.min_duration_s, p.max_duration_s);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> byte(0, 255);
  std::normal_distribution<double> frame_noise(0.0, p.frame_sigma);

  for (std::size_t v = 0; v < p.videos; ++v) {
    const std::size_t blob = v % p.clusters;
    out.planted.push_back(blob);
    auto base = gaussian_vector(rng, p.dim, p.sigma);
    for (std::size_t d = 0; d < p.dim; ++d) base[d] += common[d] + centers[blob][d];

    embstore::VideoEntry entry;
    char id[32];
    std::snprintf(id, sizeof id, "vid%05zu", v);
    entry.video_id = id;
    entry.posted_at = timestamp(rng);
    entry.duration_s = std::round(duration(rng) * 100.0) / 100.0;
    entry.frame_count_total =
        std::max<std::int64_t>(1, std::llround(entry.duration_s * p.source_fps));

    // One frame per second of source plus the final frame.
    std::vector<std::int64_t> positions;
    const auto step = static_cast<std::int64_t>(std::max(1.0, std::round(p.source_fps)));
    for (std::int64_t i = 0; i < entry.frame_count_total; i += step) positions.push_back(i);
    if (positions.back() != entry.frame_count_total - 1) {
      positions.push_back(entry.frame_count_total - 1);
    }

    for (std::int64_t pos : positions) {
      embstore::FrameRecord f;
      f.index = pos;
      f.timestamp_s = static_cast<double>(pos) / p.source_fps;
      f.embedding_row = static_cast<std::uint32_t>(store.rows());
      const bool dark = unit(rng) < p.invalid_fraction;
      f.brightness = dark ? 2.0 : 40.0 + 160.0 * unit(rng);
      f.gray_std = dark ? 1.0 : 20.0 + 60.0 * unit(rng);
      f.confidence = 0.2 + 0.8 * unit(rng);
      for (auto& b : f.luma8x8) b = static_cast<std::uint8_t>(byte(rng));
      for (std::size_t d = 0; d < p.dim; ++d) {
        store.matrix.push_back(static_cast<float>(base[d] + frame_noise(rng)));
      }
      entry.frames.push_back(f);
    }
    store.manifest.push_back(std::move(entry));
  }

  // Re-uploads: same frames and thumbnails, later timestamp, new id.
  std::uniform_int_distribution<std::size_t> pick(0, p.videos == 0 ? 0 : p.videos - 1);
  for (std::size_t k = 0; k < p.duplicates && p.videos > 0; ++k) {
    const std::size_t src = pick(rng);
    embstore::VideoEntry copy = store.manifest[src];
    char id[32];
    std::snprintf(id, sizeof id, "dup%05zu", k);
    copy.video_id = id;
    const int year = embstore::posted_year(copy.posted_at);
    copy.posted_at = std::to_string(year + 1) + copy.posted_at.substr(4);
    for (auto& f : copy.frames) {
      const auto row = store.embedding(f.embedding_row);
      const std::vector<float> values(row.begin(), row.end());
      f.embedding_row = static_cast<std::uint32_t>(store.rows());
      store.matrix.insert(store.matrix.end(), values.begin(), values.end());
    }
    store.manifest.push_back(std::move(copy));
    out.planted.push_back(out.planted[src]);
  }
  return out;
}

}  // namespace mcvc::synth
