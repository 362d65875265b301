#pragma once

// End-to-end orchestration: dedup -> select -> combine -> graph -> cluster ->
// metrics, optionally across a sweep of calibration values.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mcvc/artifacts.hpp"
#include "mcvc/combine.hpp"
#include "mcvc/embstore.hpp"
#include "mcvc/frameselect.hpp"
#include "mcvc/metrics.hpp"

namespace mcvc::pipeline {

namespace fs = std::filesystem;

// Failure inside a named pipeline stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "': " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct PipelineConfig {
  fs::path store_dir;
  fs::path out_dir;
  bool dedup = true;
  frameselect::Mode mode = frameselect::Mode::kStatic;
  frameselect::SelectionParams selection;
  combine::CombineParams combine;
  std::vector<double> cals{0.7};
  unsigned threads = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

// Reads `key = value` lines ('#' starts a comment). Values may be quoted
// strings, numbers, booleans or [a, b, ...] lists (for `cal`).
PipelineConfig load_config(const fs::path& file);

// Applies one setting by key; throws InvalidArgument for unknown keys or
// malformed values.
void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value);

// Parses "0.1,0.2" or "[0.1, 0.2]" or "0.1:0.9:0.1" (start:stop:step,
// inclusive) into a list of calibration values.
std::vector<double> parse_cal_list(const std::string& text);

// Combines the planned frames of every video. Videos whose plan selected no
// frame are left out and reported through `dropped`.
artifacts::VideoVectors combine_store(const embstore::EmbeddingStore& store,
                                      const std::vector<frameselect::SelectionPlan>& plans,
                                      const combine::CombineParams& params,
                                      std::vector<std::string>* dropped = nullptr);

struct SweepRow {
  double cal = 0.0;
  std::size_t clusters = 0;
  std::size_t largest = 0;
  double avg_size = 0.0;
  double median = 0.0;
  double singletons_pct = 0.0;
  double top10_pct = 0.0;
  double top20_pct = 0.0;
  std::size_t clusters_80pct = 0;
  double gini = 0.0;
  double silhouette = 0.0;
  double davies_bouldin = 0.0;
  double calinski_harabasz = 0.0;
  double overall = 0.0;
};

struct CalResult {
  double cal = 0.0;
  metrics::MetricsReport report;
};

// One row per calibration value, sorted by cal.
std::vector<SweepRow> sweep_summary(const std::vector<CalResult>& results);

// Index (into rows) of the highest overall score; ties go to the smaller cal.
std::size_t best_row(const std::vector<SweepRow>& rows);

nlohmann::ordered_json to_json(const std::vector<SweepRow>& rows);
std::string to_csv(const std::vector<SweepRow>& rows);

// Clusters `vectors` at each calibration value, writing graph, clusters and
// report files into out_dir plus sweep.json / sweep.csv. With a single cal the
// files are graph.bin, clusters.json, report.json; otherwise each name gets a
// "_cal<value>" suffix.
std::vector<CalResult> run_sweep(const artifacts::VideoVectors& vectors,
                                 const std::vector<double>& cals, const fs::path& out_dir,
                                 unsigned threads);

// Suffix used for per-cal artifacts, e.g. "_cal0.7".
std::string cal_suffix(double cal);

struct PipelineResult {
  std::vector<fs::path> files;
  std::vector<SweepRow> rows;
  std::vector<std::string> dropped_videos;
};

PipelineResult run_pipeline(const PipelineConfig& config);

// Metrics for a cluster file against the video vectors it was built from.
metrics::MetricsReport evaluate_clusters(const artifacts::VideoVectors& vectors,
                                         const artifacts::ClusterFile& clusters,
                                         unsigned threads = 1);

// Comparison of two clusterings of the same videos: variation of information,
// overlap matrix, and per-clustering temporal chi-square and centroid
// similarities.
nlohmann::ordered_json compare(const artifacts::VideoVectors& vectors,
                               const artifacts::ClusterFile& a,
                               const artifacts::ClusterFile& b);

}  // namespace mcvc::pipeline
