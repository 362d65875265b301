#include "mcvc/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "mcvc/dedup.hpp"
#include "mcvc/multicut.hpp"
#include "mcvc/parallel.hpp"
#include "mcvc/simgraph.hpp"

namespace mcvc::pipeline {

using nlohmann::ordered_json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string unquote(const std::string& s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    return s.substr(1, s.size() - 2);
  }
  return s;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw InvalidArgument("config '" + key + "': not a number: '" + text + "'");
  }
  return v;
}

std::size_t to_count(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw InvalidArgument("config '" + key + "': not a non-negative integer: '" + text +
                          "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw InvalidArgument("config '" + key + "': not a boolean: '" + text + "'");
}

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

void PipelineConfig::validate() const {
  selection.validate();
  combine.validate();
  if (cals.empty()) throw InvalidArgument("at least one cal value is required");
  for (double c : cals) {
    if (!(c > 0.0 && c < 1.0)) {
      throw InvalidArgument("cal values must lie in (0, 1), got " + std::to_string(c));
    }
  }
  if (threads == 0) throw InvalidArgument("threads must be >= 1");
}

std::vector<double> parse_cal_list(const std::string& text) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw InvalidArgument("unterminated cal list: " + text);
    t = t.substr(1, t.size() - 2);
  }
  std::vector<double> cals;
  if (t.find(':') != std::string::npos) {
    std::vector<double> parts;
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(to_double("cal", item));
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0]) {
      throw InvalidArgument("cal range must be start:stop:step with step > 0");
    }
    const auto steps =
        static_cast<std::size_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) {
      // Round to 1e-9 so 0.1 + 2 * 0.1 prints as 0.3.
      cals.push_back(std::round((parts[0] + static_cast<double>(i) * parts[2]) * 1e9) / 1e9);
    }
    return cals;
  }
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) cals.push_back(to_double("cal", item));
  }
  if (cals.empty()) throw InvalidArgument("empty cal list");
  return cals;
}

void apply_setting(PipelineConfig& c, const std::string& raw_key, const std::string& raw) {
  const std::string key = trim(raw_key);
  const std::string value = unquote(trim(raw));
  if (key == "store") c.store_dir = value;
  else if (key == "out") c.out_dir = value;
  else if (key == "dedup") c.dedup = to_bool(key, value);
  else if (key == "mode") c.mode = frameselect::parse_mode(value);
  else if (key == "fps") c.selection.fps = to_double(key, value);
  else if (key == "n_min") c.selection.n_min = to_count(key, value);
  else if (key == "n_max") c.selection.n_max = to_count(key, value);
  else if (key == "black_low") c.selection.black_low = to_double(key, value);
  else if (key == "bright_high") c.selection.bright_high = to_double(key, value);
  else if (key == "gray_std_min") c.selection.gray_std_min = to_double(key, value);
  else if (key == "repair_window") c.selection.repair_window = to_count(key, value);
  else if (key == "method") {
    // Switching method resets tau to that method's default unless tau is
    // given later in the file.
    const auto m = combine::parse_method(value);
    const std::size_t radius = c.combine.radius;
    c.combine = combine::CombineParams::defaults_for(m);
    c.combine.radius = radius;
  } else if (key == "tau") c.combine.tau = to_double(key, value);
  else if (key == "radius") c.combine.radius = to_count(key, value);
  else if (key == "cal") c.cals = parse_cal_list(value);
  else if (key == "threads") c.threads = static_cast<unsigned>(to_count(key, value));
  else if (key == "seed") c.seed = to_count(key, value);
  else throw InvalidArgument("unknown config key '" + key + "'");
}

PipelineConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw InvalidArgument("cannot open config " + file.string());
  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(file.string() + ":" + std::to_string(line_no) +
                            ": expected key = value");
    }
    try {
      apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const InvalidArgument& e) {
      throw InvalidArgument(file.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

artifacts::VideoVectors combine_store(const embstore::EmbeddingStore& store,
                                      const std::vector<frameselect::SelectionPlan>& plans,
                                      const combine::CombineParams& params,
                                      std::vector<std::string>* dropped) {
  params.validate();
  std::unordered_map<std::string, const embstore::VideoEntry*> by_id;
  for (const auto& v : store.manifest) by_id.emplace(v.video_id, &v);

  artifacts::VideoVectors out;
  out.method = std::string(combine::to_string(params.method));
  std::vector<std::vector<double>> rows;
  for (const auto& plan : plans) {
    const auto it = by_id.find(plan.video_id);
    if (it == by_id.end()) throw InvalidArgument("plan for unknown video " + plan.video_id);
    const embstore::VideoEntry& video = *it->second;
    if (plan.indices.empty()) {
      if (dropped) dropped->push_back(plan.video_id);
      continue;
    }
    std::vector<embstore::FrameRecord> frames;
    for (std::int64_t idx : plan.indices) {
      const auto f = std::find_if(video.frames.begin(), video.frames.end(),
                                  [&](const auto& fr) { return fr.index == idx; });
      if (f == video.frames.end()) {
        throw InvalidArgument("video " + video.video_id + " has no stored frame " +
                              std::to_string(idx));
      }
      frames.push_back(*f);
    }
    std::optional<std::vector<double>> confidences;
    if (combine::needs_confidence(params.method)) {
      confidences.emplace();
      for (const auto& f : frames) {
        if (!f.confidence) {
          throw InvalidArgument(std::string(combine::to_string(params.method)) +
                                ": video " + video.video_id + " frame " +
                                std::to_string(f.index) + " has no confidence");
        }
        confidences->push_back(*f.confidence);
      }
    }
    auto emb = combine::combine(embstore::gather(store, frames), confidences, params);
    out.video_ids.push_back(video.video_id);
    out.posted_at.push_back(video.posted_at);
    out.weights.push_back(std::move(emb.weights));
    rows.push_back(std::move(emb.vector));
  }
  if (rows.empty()) throw InvalidArgument("no video has a usable frame");
  out.vectors = Matrix::from_rows(rows);
  return out;
}

std::vector<SweepRow> sweep_summary(const std::vector<CalResult>& results) {
  std::vector<SweepRow> rows;
  for (const auto& r : results) {
    const auto& m = r.report;
    SweepRow row;
    row.cal = r.cal;
    row.clusters = m.stats.k;
    row.largest = m.stats.largest;
    row.avg_size = m.stats.mean;
    row.median = m.stats.median;
    row.singletons_pct = 100.0 * m.singleton_ratio;
    row.top10_pct = 100.0 * m.coverage_top10;
    row.top20_pct = 100.0 * metrics::coverage_top(m.sizes, 20);
    row.clusters_80pct = metrics::clusters_for_coverage(m.sizes, 0.8);
    row.gini = m.gini;
    row.silhouette = m.silhouette;
    row.davies_bouldin = m.davies_bouldin;
    row.calinski_harabasz = m.calinski_harabasz;
    row.overall = m.overall;
    rows.push_back(row);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.cal < b.cal; });
  return rows;
}

std::size_t best_row(const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw InvalidArgument("best_row: empty sweep");
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].overall > rows[best].overall ||
        (rows[i].overall == rows[best].overall && rows[i].cal < rows[best].cal)) {
      best = i;
    }
  }
  return best;
}

ordered_json to_json(const std::vector<SweepRow>& rows) {
  ordered_json j = ordered_json::array();
  for (const auto& r : rows) {
    j.push_back({{"cal", r.cal},
                 {"clusters", r.clusters},
                 {"largest", r.largest},
                 {"avg_size", r.avg_size},
                 {"median", r.median},
                 {"singletons_pct", r.singletons_pct},
                 {"top10_pct", r.top10_pct},
                 {"top20_pct", r.top20_pct},
                 {"clusters_80pct", r.clusters_80pct},
                 {"gini", r.gini},
                 {"silhouette", r.silhouette},
                 {"davies_bouldin", r.davies_bouldin},
                 {"calinski_harabasz", r.calinski_harabasz},
                 {"overall", r.overall}});
  }
  return j;
}

std::string to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "calibration,clusters,largest,avg_size,median,singletons_pct,top10_pct,"
         "top20_pct,clusters_80pct,gini,silhouette,davies_bouldin,calinski_harabasz,"
         "overall\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf,
                  "%g,%zu,%zu,%.2f,%.1f,%.2f,%.2f,%.2f,%zu,%.3f,%.3f,%.3f,%.3f,%.3f\n", r.cal,
                  r.clusters, r.largest, r.avg_size, r.median, r.singletons_pct,
                  r.top10_pct, r.top20_pct, r.clusters_80pct, r.gini, r.silhouette,
                  r.davies_bouldin, r.calinski_harabasz, r.overall);
    out << buf;
  }
  return out.str();
}

std::string cal_suffix(double cal) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, cal);
  return "_cal" + std::string(buf, ptr);
}

metrics::MetricsReport evaluate_clusters(const artifacts::VideoVectors& vectors,
                                         const artifacts::ClusterFile& clusters,
                                         unsigned threads) {
  const auto labels = artifacts::labels_in_order(clusters, vectors.video_ids);
  return metrics::evaluate(vectors.vectors, labels, threads);
}

std::vector<CalResult> run_sweep(const artifacts::VideoVectors& vectors,
                                 const std::vector<double>& cals, const fs::path& out_dir,
                                 unsigned threads) {
  if (cals.empty()) throw InvalidArgument("run_sweep: no cal values");
  fs::create_directories(out_dir);
  const auto sim = stage("graph", [&] { return simgraph::cosine_matrix(vectors.vectors, threads); });
  const bool single = cals.size() == 1;

  std::vector<CalResult> results(cals.size());
  std::vector<std::exception_ptr> errors(cals.size());
  // Parallelism goes to the sweep entries when there are several; each entry
  // then runs single-threaded.
  const unsigned inner = single ? threads : 1;
  parallel_for(cals.size(), threads, [&](std::size_t i) {
    try {
      const double cal = cals[i];
      const std::string suffix = single ? "" : cal_suffix(cal);
      const fs::path graph_file = out_dir / ("graph" + suffix + ".bin");
      stage("graph", [&] { simgraph::write_graph(simgraph::calibrate(sim, cal), graph_file); });

      artifacts::ClusterFile clusters = stage("cluster", [&] {
        const auto graph = simgraph::read_graph(graph_file);
        const auto solved = multicut::solve(graph);
        return artifacts::ClusterFile{vectors.video_ids, solved.clustering, solved.objective,
                                      multicut::to_string(solved.solver), cal};
      });
      stage("cluster", [&] {
        artifacts::write_clusters(clusters, out_dir / ("clusters" + suffix + ".json"));
      });

      results[i] = stage("metrics", [&] {
        const auto reread = artifacts::read_clusters(out_dir / ("clusters" + suffix + ".json"));
        auto report = evaluate_clusters(vectors, reread, inner);
        ordered_json doc = artifacts::to_json(report);
        doc["cal"] = cal;
        artifacts::write_json(doc, out_dir / ("report" + suffix + ".json"));
        return CalResult{cal, report};
      });
    } catch (...) {
      errors[i] = std::current_exception();
    }
  });
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  const auto rows = sweep_summary(results);
  ordered_json summary;
  summary["best_cal"] = rows[best_row(rows)].cal;
  summary["rows"] = to_json(rows);
  artifacts::write_json(summary, out_dir / "sweep.json");
  std::ofstream csv(out_dir / "sweep.csv", std::ios::trunc);
  csv << to_csv(rows);
  return results;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
  stage("config", [&] { config.validate(); });
  PipelineResult result;
  const fs::path& out = config.out_dir;

  embstore::EmbeddingStore store =
      stage("load", [&] { return embstore::read_store(config.store_dir); });
  stage("load", [&] { fs::create_directories(out); });

  if (config.dedup) {
    const auto report = stage("dedup", [&] {
      auto r = dedup::dedup_store(store);
      artifacts::write_dedup(r, out / "dedup.json");
      return r;
    });
    result.files.push_back(out / "dedup.json");
    std::erase_if(store.manifest, [&](const embstore::VideoEntry& v) {
      return report.duplicates.count(v.video_id) > 0;
    });
  }

  stage("select", [&] {
    const auto plans = frameselect::plan_store(store, config.mode, config.selection);
    artifacts::write_plans(plans, config.selection, out / "plans.json");
  });
  result.files.push_back(out / "plans.json");

  stage("combine", [&] {
    const auto plans = artifacts::read_plans(out / "plans.json");
    const auto vv = combine_store(store, plans, config.combine, &result.dropped_videos);
    artifacts::write_video_vectors(vv, out / "videovecs.bin");
  });
  result.files.push_back(out / "videovecs.bin");
  result.files.push_back(out / "videovecs.jsonl");

  const auto vectors =
      stage("combine", [&] { return artifacts::read_video_vectors(out / "videovecs.bin"); });
  const auto results = run_sweep(vectors, config.cals, out, config.threads);
  result.rows = sweep_summary(results);
  for (double cal : config.cals) {
    const std::string suffix = config.cals.size() == 1 ? "" : cal_suffix(cal);
    result.files.push_back(out / ("graph" + suffix + ".bin"));
    result.files.push_back(out / ("clusters" + suffix + ".json"));
    result.files.push_back(out / ("report" + suffix + ".json"));
  }
  result.files.push_back(out / "sweep.json");
  result.files.push_back(out / "sweep.csv");
  return result;
}

ordered_json compare(const artifacts::VideoVectors& vectors, const artifacts::ClusterFile& a,
                     const artifacts::ClusterFile& b) {
  const auto la = artifacts::labels_in_order(a, vectors.video_ids);
  const auto lb = artifacts::labels_in_order(b, vectors.video_ids);
  std::vector<int> years;
  years.reserve(vectors.size());
  for (const auto& ts : vectors.posted_at) years.push_back(embstore::posted_year(ts));

  const Matrix unit = metrics::l2_normalized(vectors.vectors);
  auto describe = [&](const std::vector<std::size_t>& labels) {
    ordered_json j;
    const auto chi = metrics::chi_square_temporal(labels, years);
    j["chi_square"] = chi.statistic ? ordered_json(*chi.statistic) : ordered_json(nullptr);
    j["year_concentration"] = chi.concentration;
    j["concentrated_clusters"] = ordered_json::array();
    for (std::size_t q = 0; q < chi.flagged.size(); ++q) {
      if (chi.flagged[q]) j["concentrated_clusters"].push_back(q);
    }
    if (metrics::sizes_of(labels).size() >= 2) {
      const auto cs = metrics::centroid_similarity(unit, labels);
      ordered_json rows = ordered_json::array();
      for (std::size_t i = 0; i < cs.k; ++i) {
        rows.push_back(std::vector<double>(cs.matrix.begin() + i * cs.k,
                                           cs.matrix.begin() + (i + 1) * cs.k));
      }
      j["centroid_similarity"] = rows;
      j["merge_candidates"] = cs.merge_candidates;
      j["mean_inter_cluster_similarity"] = cs.mean_off_diagonal;
      j["max_off_diagonal_similarity"] = cs.max_off_diagonal;
    } else {
      j["centroid_similarity"] = nullptr;
    }
    return j;
  };

  ordered_json j;
  j["n"] = vectors.size();
  j["variation_of_information"] = metrics::variation_of_information(la, lb);
  j["overlap_pct"] = metrics::overlap_matrix(la, lb);
  j["a"] = describe(la);
  j["b"] = describe(lb);
  return j;
}

}  // namespace mcvc::pipeline
