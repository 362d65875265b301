#include "mcvc/artifacts.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_map>

#include "mcvc/embstore.hpp"

namespace mcvc::artifacts {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json parse_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
}

}  // namespace

void write_json(const ordered_json& doc, const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw Error("write failed: " + file.string());
}

json read_json(const fs::path& file) { return parse_file(file); }

ordered_json to_json(const dedup::DedupReport& report) {
  ordered_json j;
  j["originals"] = report.originals;
  ordered_json dups = ordered_json::object();
  for (const auto& [dup, orig] : report.duplicates) dups[dup] = orig;
  j["duplicates"] = dups;
  j["all_black"] = report.all_black;
  j["counts"] = {{"videos", report.videos},
                 {"originals", report.originals.size()},
                 {"duplicates", report.duplicates.size()},
                 {"duplicate_groups", report.groups}};
  return j;
}

void write_dedup(const dedup::DedupReport& report, const fs::path& file) {
  write_json(to_json(report), file);
}

void write_plans(const std::vector<frameselect::SelectionPlan>& plans,
                 const frameselect::SelectionParams& params, const fs::path& file) {
  ordered_json j;
  j["params"] = {{"fps", params.fps},
                 {"n_min", params.n_min},
                 {"n_max", params.n_max},
                 {"black_low", params.black_low},
                 {"bright_high", params.bright_high},
                 {"gray_std_min", params.gray_std_min},
                 {"repair_window", params.repair_window}};
  j["plans"] = ordered_json::array();
  for (const auto& p : plans) {
    j["plans"].push_back({{"video_id", p.video_id},
                          {"mode", frameselect::to_string(p.mode)},
                          {"indices", p.indices},
                          {"skipped", p.skipped}});
  }
  write_json(j, file);
}

std::vector<frameselect::SelectionPlan> read_plans(const fs::path& file) {
  const json j = parse_file(file);
  std::vector<frameselect::SelectionPlan> plans;
  try {
    for (const auto& p : j.at("plans")) {
      frameselect::SelectionPlan plan;
      plan.video_id = p.at("video_id").get<std::string>();
      plan.mode = frameselect::parse_mode(p.at("mode").get<std::string>());
      plan.indices = p.at("indices").get<std::vector<std::int64_t>>();
      plan.skipped = p.at("skipped").get<std::vector<std::int64_t>>();
      plans.push_back(std::move(plan));
    }
  } catch (const json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  return plans;
}

fs::path sidecar_path(const fs::path& bin) {
  fs::path p = bin;
  p.replace_extension(".jsonl");
  return p;
}

void write_video_vectors(const VideoVectors& vv, const fs::path& bin) {
  if (vv.vectors.rows() != vv.size() || vv.posted_at.size() != vv.size()) {
    throw InvalidArgument("write_video_vectors: inconsistent sizes");
  }
  if (bin.has_parent_path()) fs::create_directories(bin.parent_path());
  std::vector<float> values(vv.vectors.data().begin(), vv.vectors.data().end());
  embstore::write_matrix_file(bin, static_cast<std::uint32_t>(vv.vectors.rows()),
                              static_cast<std::uint32_t>(vv.vectors.cols()), values);
  std::ofstream out(sidecar_path(bin), std::ios::trunc);
  if (!out) throw Error("cannot write " + sidecar_path(bin).string());
  for (std::size_t i = 0; i < vv.size(); ++i) {
    ordered_json j;
    j["row"] = i;
    j["video_id"] = vv.video_ids[i];
    j["posted_at"] = vv.posted_at[i];
    j["method"] = vv.method;
    j["weights"] = i < vv.weights.size() ? vv.weights[i] : std::vector<double>{};
    out << j.dump() << '\n';
  }
}

VideoVectors read_video_vectors(const fs::path& bin) {
  const auto m = embstore::read_matrix_file(bin);
  VideoVectors vv;
  vv.vectors = Matrix(m.rows, m.dim, std::vector<double>(m.values.begin(), m.values.end()));
  std::ifstream in(sidecar_path(bin));
  if (!in) throw FormatError("missing video manifest " + sidecar_path(bin).string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.at("row").get<std::size_t>() != vv.video_ids.size()) {
        throw FormatError("video manifest rows out of order");
      }
      vv.video_ids.push_back(j.at("video_id").get<std::string>());
      vv.posted_at.push_back(j.at("posted_at").get<std::string>());
      vv.method = j.at("method").get<std::string>();
      vv.weights.push_back(j.at("weights").get<std::vector<double>>());
    } catch (const json::exception& e) {
      throw FormatError(sidecar_path(bin).string() + ": " + e.what());
    }
  }
  if (vv.video_ids.size() != m.rows) {
    throw FormatError("video manifest lists " + std::to_string(vv.video_ids.size()) +
                      " videos, matrix has " + std::to_string(m.rows) + " rows");
  }
  return vv;
}

void write_clusters(const ClusterFile& clusters, const fs::path& file) {
  const auto& c = clusters.clustering;
  if (clusters.video_ids.size() != c.n()) {
    throw InvalidArgument("write_clusters: id count does not match clustering");
  }
  ordered_json j;
  j["solver"] = clusters.solver;
  j["objective"] = clusters.objective;
  if (clusters.cal) j["cal"] = *clusters.cal;
  j["n"] = c.n();
  j["k"] = c.k();

  const auto sizes = c.sizes();
  std::vector<std::size_t> order(sizes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sizes[a] > sizes[b]; });
  j["clusters"] = ordered_json::array();
  for (std::size_t id : order) j["clusters"].push_back({{"id", id}, {"size", sizes[id]}});

  ordered_json assign = ordered_json::object();
  for (std::size_t i = 0; i < c.n(); ++i) assign[clusters.video_ids[i]] = c[i];
  j["assignments"] = assign;
  write_json(j, file);
}

ClusterFile read_clusters(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw FormatError("cannot open " + file.string());
  ClusterFile out;
  try {
    const ordered_json j = ordered_json::parse(in);
    out.solver = j.at("solver").get<std::string>();
    out.objective = j.at("objective").get<double>();
    if (j.contains("cal")) out.cal = j.at("cal").get<double>();
    std::vector<std::size_t> labels;
    for (const auto& [id, label] : j.at("assignments").items()) {
      out.video_ids.push_back(id);
      labels.push_back(label.get<std::size_t>());
    }
    out.clustering = multicut::Clustering(labels);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  return out;
}

ordered_json to_json(const metrics::MetricsReport& r) {
  ordered_json j;
  j["n_clusters"] = r.stats.k;
  j["largest"] = r.stats.largest;
  j["mean_size"] = r.stats.mean;
  j["median_size"] = r.stats.median;
  j["gini"] = r.gini;
  j["top10_coverage"] = r.coverage_top10;
  j["singleton_ratio"] = r.singleton_ratio;
  j["silhouette"] = r.silhouette;
  j["davies_bouldin"] = r.davies_bouldin;
  j["calinski_harabasz"] = r.calinski_harabasz;
  j["overall"] = r.overall;
  j["sizes"] = r.sizes;
  return j;
}

std::vector<std::size_t> labels_in_order(const ClusterFile& clusters,
                                         const std::vector<std::string>& order) {
  std::unordered_map<std::string, std::size_t> label_of;
  for (std::size_t i = 0; i < clusters.video_ids.size(); ++i) {
    label_of.emplace(clusters.video_ids[i], clusters.clustering[i]);
  }
  std::vector<std::size_t> labels;
  labels.reserve(order.size());
  for (const auto& id : order) {
    const auto it = label_of.find(id);
    if (it == label_of.end()) {
      throw InvalidArgument("video " + id + " has no cluster assignment");
    }
    labels.push_back(it->second);
  }
  return labels;
}

}  // namespace mcvc::artifacts
