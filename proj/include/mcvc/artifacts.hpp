#pragma once

// Files exchanged between pipeline stages.
//
//   plans.json        selection plans per video
//   videovecs.bin     video-level vectors (same layout as embeddings.bin)
//   videovecs.jsonl   one line per row: video_id, posted_at, method, weights
//   graph.bin         see simgraph::write_graph
//   clusters.json     assignments, sizes, objective, solver
//   report.json       metrics report; comparison.json for two clusterings

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcvc/dedup.hpp"
#include "mcvc/frameselect.hpp"
#include "mcvc/matrix.hpp"
#include "mcvc/metrics.hpp"
#include "mcvc/multicut.hpp"

namespace mcvc::artifacts {

namespace fs = std::filesystem;

nlohmann::ordered_json to_json(const dedup::DedupReport& report);
void write_dedup(const dedup::DedupReport& report, const fs::path& file);

void write_plans(const std::vector<frameselect::SelectionPlan>& plans,
                 const frameselect::SelectionParams& params, const fs::path& file);
std::vector<frameselect::SelectionPlan> read_plans(const fs::path& file);

struct VideoVectors {
  std::vector<std::string> video_ids;
  std::vector<std::string> posted_at;
  std::string method;
  std::vector<std::vector<double>> weights;  // per video; empty when unweighted
  Matrix vectors;                            // one row per video

  std::size_t size() const { return video_ids.size(); }
};

// Sidecar manifest path for a vector file: same stem, ".jsonl" extension.
fs::path sidecar_path(const fs::path& bin);

// Vectors are stored as f32; reading back yields the rounded values.
void write_video_vectors(const VideoVectors& vv, const fs::path& bin);
VideoVectors read_video_vectors(const fs::path& bin);

struct ClusterFile {
  std::vector<std::string> video_ids;
  multicut::Clustering clustering;
  double objective = 0.0;
  std::string solver;
  std::optional<double> cal;
};

void write_clusters(const ClusterFile& clusters, const fs::path& file);
ClusterFile read_clusters(const fs::path& file);

nlohmann::ordered_json to_json(const metrics::MetricsReport& report);
void write_json(const nlohmann::ordered_json& doc, const fs::path& file);
nlohmann::json read_json(const fs::path& file);

// Labels of `clusters` reordered to follow `order` (video ids). Throws when a
// video is missing.
std::vector<std::size_t> labels_in_order(const ClusterFile& clusters,
                                         const std::vector<std::string>& order);

}  // namespace mcvc::artifacts
