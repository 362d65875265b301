#pragma once

// Portable embedding store: a JSONL manifest describing videos and their
// frames, plus a flat little-endian f32 matrix holding one embedding per frame.
//
//   manifest.jsonl   one VideoEntry per line
//   embeddings.bin   "MCVC" | u32 version=1 | u32 rows | u32 dim | rows*dim f32
//   store_meta.json  {"backbone_tag": "..."} (optional on read)

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mcvc/matrix.hpp"

namespace mcvc::embstore {

inline constexpr char kManifestFile[] = "manifest.jsonl";
inline constexpr char kMatrixFile[] = "embeddings.bin";
inline constexpr char kMetaFile[] = "store_meta.json";
inline constexpr std::uint32_t kFormatVersion = 1;

using Luma8x8 = std::array<std::uint8_t, 64>;

struct FrameRecord {
  std::int64_t index = 0;  // position in the source video
  double timestamp_s = 0.0;
  std::uint32_t embedding_row = 0;
  double gray_std = 0.0;
  double brightness = 0.0;
  std::optional<double> confidence;
  Luma8x8 luma8x8{};
  // Set by the extractor when a frame failed to decode cleanly. Serialized
  // only when true.
  bool corrupted = false;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct VideoEntry {
  std::string video_id;
  std::string posted_at;  // ISO-8601 UTC, e.g. 2021-03-04T10:00:00Z
  double duration_s = 0.0;
  std::int64_t frame_count_total = 0;
  std::vector<FrameRecord> frames;

  friend bool operator==(const VideoEntry&, const VideoEntry&) = default;
};

// Rows of the matrix are embeddings; frame records point into it via
// embedding_row.
struct EmbeddingStore {
  std::vector<VideoEntry> manifest;
  std::uint32_t dim = 0;
  std::vector<float> matrix;  // rows * dim, row-major
  std::string backbone_tag;

  std::size_t rows() const { return dim == 0 ? 0 : matrix.size() / dim; }
  std::span<const float> embedding(std::uint32_t row) const {
    return {matrix.data() + static_cast<std::size_t>(row) * dim, dim};
  }
  const VideoEntry* find(const std::string& video_id) const;

  friend bool operator==(const EmbeddingStore&, const EmbeddingStore&) = default;
};

struct Violation {
  std::string video_id;                // empty for store-level problems
  std::optional<std::int64_t> frame_index;
  std::string kind;                    // short machine-readable tag
  std::string message;
};

using ValidationReport = std::vector<Violation>;

// Checks every type invariant; an empty report means the store is valid.
ValidationReport validate_store(const EmbeddingStore& store);

// Throws InvalidArgument (listing the first violations) if the store is
// invalid; nothing is written in that case.
void write_store(const EmbeddingStore& store, const std::filesystem::path& dir);

// Throws FormatError on missing files, bad magic/version, shape mismatches,
// out-of-range rows or non-finite values.
EmbeddingStore read_store(const std::filesystem::path& dir);

// Parses the files without checking store invariants, so that
// validate_store can list every violation. Format errors still throw.
EmbeddingStore read_store_unchecked(const std::filesystem::path& dir);

// Gathers the embeddings of the given frames into a Matrix (one row each).
Matrix gather(const EmbeddingStore& store, std::span<const FrameRecord> frames);

// Parses the leading calendar year of an ISO-8601 timestamp.
int posted_year(const std::string& iso8601);

// Seconds since the Unix epoch for an ISO-8601 UTC timestamp. Accepts
// YYYY-MM-DD, YYYY-MM-DDTHH:MM[:SS[.fff]][Z].
std::int64_t posted_epoch_seconds(const std::string& iso8601);

// Raw matrix file helpers, shared with the video-vector artifact.
void write_matrix_file(const std::filesystem::path& file, std::uint32_t rows,
                       std::uint32_t dim, std::span<const float> values);
struct MatrixFile {
  std::uint32_t rows = 0;
  std::uint32_t dim = 0;
  std::vector<float> values;
};
MatrixFile read_matrix_file(const std::filesystem::path& file);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace mcvc::embstore
