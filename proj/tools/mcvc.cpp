// mcvc: command-line front end for the video clustering toolkit.

#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "mcvc/artifacts.hpp"
#include "mcvc/dedup.hpp"
#include "mcvc/embstore.hpp"
#include "mcvc/multicut.hpp"
#include "mcvc/pipeline.hpp"
#include "mcvc/simgraph.hpp"
#include "mcvc/synth.hpp"

namespace fs = std::filesystem;
using namespace mcvc;

namespace {

struct Options {
  std::string config_file;
  unsigned threads = 1;
  std::uint64_t seed = 1;
  std::string out;

  std::string store;
  std::string plans;
  std::string videovecs;
  std::string graph;
  std::string clusters;
  std::string clusters_a;
  std::string clusters_b;

  std::string mode = "static";
  double fps = 1.0;
  std::size_t n_min = 4;
  std::size_t n_max = 100;

  std::string method = "average";
  double tau = 2.0;
  std::size_t radius = 1;

  std::string cal = "0.7";
  std::string solver = "gaec+klj";
  double black_threshold = dedup::kDefaultBlackThreshold;
  bool no_dedup = false;

  synth::SynthParams synth;
};

void require_out(const Options& o) {
  if (o.out.empty()) throw InvalidArgument("--out is required");
}

// Config file first, then any flag given on the command line.
pipeline::PipelineConfig resolve_config(const Options& o, const CLI::App& app,
                                        const CLI::App& sub) {
  pipeline::PipelineConfig c;
  if (!o.config_file.empty()) c = pipeline::load_config(o.config_file);
  auto given = [&](const char* name) {
    const CLI::Option* opt = sub.get_option_no_throw(name);
    if (!opt) opt = app.get_option_no_throw(name);
    return opt && opt->count() > 0;
  };
  if (given("--store")) c.store_dir = o.store;
  if (given("--out")) c.out_dir = o.out;
  if (given("--threads")) c.threads = o.threads;
  if (given("--seed")) c.seed = o.seed;
  if (given("--mode")) c.mode = frameselect::parse_mode(o.mode);
  if (given("--fps")) c.selection.fps = o.fps;
  if (given("--n-min")) c.selection.n_min = o.n_min;
  if (given("--n-max")) c.selection.n_max = o.n_max;
  if (given("--method")) {
    const std::size_t radius = c.combine.radius;
    c.combine = combine::CombineParams::defaults_for(combine::parse_method(o.method));
    c.combine.radius = radius;
  }
  if (given("--tau")) c.combine.tau = o.tau;
  if (given("--radius")) c.combine.radius = o.radius;
  if (given("--cal")) c.cals = pipeline::parse_cal_list(o.cal);
  if (given("--no-dedup")) c.dedup = !o.no_dedup;
  return c;
}

int run_dedup(const Options& o) {
  require_out(o);
  const auto store = embstore::read_store(o.store);
  const auto report = dedup::dedup_store(store, o.black_threshold);
  artifacts::write_dedup(report, o.out);
  std::printf("%zu videos, %zu originals, %zu duplicates\n", report.videos,
              report.originals.size(), report.duplicates.size());
  return 0;
}

int run_validate(const Options& o) {
  embstore::EmbeddingStore store;
  try {
    store = embstore::read_store_unchecked(o.store);
  } catch (const FormatError& e) {
    std::printf("invalid: %s\n", e.what());
    return 2;
  }
  const auto report = embstore::validate_store(store);
  for (const auto& v : report) {
    std::printf("%s%s%s: %s\n", v.video_id.c_str(),
                v.frame_index ? ("#" + std::to_string(*v.frame_index)).c_str() : "",
                v.kind.c_str(), v.message.c_str());
  }
  std::printf("%zu videos, %zu frames, dim %u, %zu violations\n", store.manifest.size(),
              store.rows(), store.dim, report.size());
  return report.empty() ? 0 : 2;
}

int run_select(const pipeline::PipelineConfig& c, const Options& o) {
  require_out(o);
  const auto store = embstore::read_store(c.store_dir);
  const auto plans = frameselect::plan_store(store, c.mode, c.selection);
  artifacts::write_plans(plans, c.selection, o.out);
  std::size_t skipped = 0;
  for (const auto& p : plans) skipped += p.skipped.size();
  std::printf("%zu plans written, %zu positions skipped\n", plans.size(), skipped);
  return 0;
}

int run_combine(const pipeline::PipelineConfig& c, const Options& o) {
  require_out(o);
  const auto store = embstore::read_store(c.store_dir);
  const auto plans = artifacts::read_plans(o.plans);
  std::vector<std::string> dropped;
  const auto vv = pipeline::combine_store(store, plans, c.combine, &dropped);
  artifacts::write_video_vectors(vv, o.out);
  for (const auto& id : dropped) std::fprintf(stderr, "dropped %s: no usable frame\n", id.c_str());
  std::printf("%zu video vectors (%s)\n", vv.size(), vv.method.c_str());
  return 0;
}

int run_graph(const pipeline::PipelineConfig& c, const Options& o) {
  require_out(o);
  if (c.cals.size() != 1) throw InvalidArgument("graph takes a single --cal value");
  const auto vv = artifacts::read_video_vectors(o.videovecs);
  const auto sim = simgraph::cosine_matrix(vv.vectors, c.threads);
  const auto graph = simgraph::calibrate(sim, c.cals.front());
  simgraph::write_graph(graph, o.out);
  std::printf("graph: %zu nodes, %zu edges\n", graph.n(), graph.costs().size());
  return 0;
}

int run_cluster(const Options& o) {
  require_out(o);
  const auto graph = simgraph::read_graph(o.graph);
  multicut::SolveResult solved;
  if (o.solver == "gaec") solved = multicut::gaec(graph);
  else if (o.solver == "gaec+klj") solved = multicut::solve(graph);
  else if (o.solver == "exact") solved = multicut::brute_force(graph);
  else throw InvalidArgument("unknown solver '" + o.solver + "'");

  std::vector<std::string> ids;
  if (!o.videovecs.empty()) {
    ids = artifacts::read_video_vectors(o.videovecs).video_ids;
    if (ids.size() != graph.n()) {
      throw InvalidArgument("video vectors and graph disagree on the number of videos");
    }
  } else {
    for (std::size_t i = 0; i < graph.n(); ++i) ids.push_back(std::to_string(i));
  }
  artifacts::write_clusters(
      {ids, solved.clustering, solved.objective, multicut::to_string(solved.solver), {}},
      o.out);
  std::printf("%zu clusters, objective %.6f (%s)\n", solved.clustering.k(), solved.objective,
              multicut::to_string(solved.solver).c_str());
  return 0;
}

int run_metrics(const pipeline::PipelineConfig& c, const Options& o) {
  require_out(o);
  const auto vv = artifacts::read_video_vectors(o.videovecs);
  const auto clusters = artifacts::read_clusters(o.clusters);
  const auto report = pipeline::evaluate_clusters(vv, clusters, c.threads);
  artifacts::write_json(artifacts::to_json(report), o.out);
  std::printf("k=%zu silhouette=%.3f DB=%.3f CH=%.3f overall=%.3f\n", report.stats.k,
              report.silhouette, report.davies_bouldin, report.calinski_harabasz,
              report.overall);
  return 0;
}

int run_compare(const Options& o) {
  require_out(o);
  const auto vv = artifacts::read_video_vectors(o.videovecs);
  const auto doc = pipeline::compare(vv, artifacts::read_clusters(o.clusters_a),
                                     artifacts::read_clusters(o.clusters_b));
  artifacts::write_json(doc, o.out);
  std::printf("VI = %.3f\n", doc["variation_of_information"].get<double>());
  return 0;
}

int run_sweep(const pipeline::PipelineConfig& c, const Options& o) {
  require_out(o);
  const auto vv = artifacts::read_video_vectors(o.videovecs);
  const auto results = pipeline::run_sweep(vv, c.cals, o.out, c.threads);
  std::fputs(pipeline::to_csv(pipeline::sweep_summary(results)).c_str(), stdout);
  return 0;
}

int run_pipeline_cmd(const pipeline::PipelineConfig& c) {
  if (c.out_dir.empty()) throw InvalidArgument("--out is required");
  const auto result = pipeline::run_pipeline(c);
  for (const auto& id : result.dropped_videos) {
    std::fprintf(stderr, "dropped %s: no usable frame\n", id.c_str());
  }
  std::fputs(pipeline::to_csv(result.rows).c_str(), stdout);
  return 0;
}

int run_synth(const Options& o) {
  require_out(o);
  auto params = o.synth;
  params.seed = o.seed;
  const auto generated = synth::generate(params);
  embstore::write_store(generated.store, o.out);
  nlohmann::ordered_json planted = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < generated.planted.size(); ++i) {
    planted[generated.store.manifest[i].video_id] = generated.planted[i];
  }
  artifacts::write_json(planted, fs::path(o.out) / "planted.json");
  std::printf("%zu videos, %zu frames, dim %u\n", generated.store.manifest.size(),
              generated.store.rows(), generated.store.dim);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster videos into visual themes via minimum-cost multicut"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_file, "key = value configuration file")
      ->check(CLI::ExistingFile);
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "seed for synthetic data");
  app.add_option("--out", o.out, "output file or directory");

  auto* dedup_cmd = app.add_subcommand("dedup", "mark duplicate videos");
  dedup_cmd->add_option("--store", o.store)->required();
  dedup_cmd->add_option("--black-threshold", o.black_threshold);

  auto* validate_cmd = app.add_subcommand("validate", "check a store's invariants");
  validate_cmd->add_option("--store", o.store)->required();

  auto add_selection = [&](CLI::App* cmd) {
    cmd->add_option("--mode", o.mode)->check(CLI::IsMember({"static", "dynamic"}));
    cmd->add_option("--fps", o.fps);
    cmd->add_option("--n-min", o.n_min);
    cmd->add_option("--n-max", o.n_max);
  };
  auto add_combine = [&](CLI::App* cmd) {
    cmd->add_option("--method", o.method)
        ->check(CLI::IsMember({"average", "max_confidence", "weighted_diversity",
                               "weighted_confidence", "temporal_coherence"}));
    cmd->add_option("--tau", o.tau);
    cmd->add_option("--radius", o.radius);
  };

  auto* select_cmd = app.add_subcommand("select", "plan frame selection");
  select_cmd->add_option("--store", o.store);
  add_selection(select_cmd);

  auto* combine_cmd = app.add_subcommand("combine", "combine frames into video vectors");
  combine_cmd->add_option("--store", o.store);
  combine_cmd->add_option("--plans", o.plans)->required();
  add_combine(combine_cmd);

  auto* graph_cmd = app.add_subcommand("graph", "build the calibrated cost graph");
  graph_cmd->add_option("--videovecs", o.videovecs)->required();
  graph_cmd->add_option("--cal", o.cal);

  auto* cluster_cmd = app.add_subcommand("cluster", "solve the multicut problem");
  cluster_cmd->add_option("--graph", o.graph)->required();
  cluster_cmd->add_option("--videovecs", o.videovecs, "video ids for the output");
  cluster_cmd->add_option("--solver", o.solver)
      ->check(CLI::IsMember({"gaec", "gaec+klj", "exact"}));

  auto* metrics_cmd = app.add_subcommand("metrics", "evaluate a clustering");
  metrics_cmd->add_option("--videovecs", o.videovecs)->required();
  metrics_cmd->add_option("--clusters", o.clusters)->required();

  auto* compare_cmd = app.add_subcommand("compare", "compare two clusterings");
  compare_cmd->add_option("--a", o.clusters_a)->required();
  compare_cmd->add_option("--b", o.clusters_b)->required();
  compare_cmd->add_option("--videovecs", o.videovecs)->required();

  auto* sweep_cmd = app.add_subcommand("sweep", "cluster across calibration values");
  sweep_cmd->add_option("--videovecs", o.videovecs)->required();
  sweep_cmd->add_option("--cal", o.cal, "list (0.1,0.5) or range (0.1:0.9:0.1)");

  auto* pipeline_cmd = app.add_subcommand("pipeline", "run every stage end to end");
  pipeline_cmd->add_option("--store", o.store);
  pipeline_cmd->add_option("--cal", o.cal);
  pipeline_cmd->add_flag("--no-dedup", o.no_dedup);
  add_selection(pipeline_cmd);
  add_combine(pipeline_cmd);

  auto* synth_cmd = app.add_subcommand("synth", "generate a planted-cluster store");
  synth_cmd->add_option("--videos", o.synth.videos);
  synth_cmd->add_option("--clusters", o.synth.clusters);
  synth_cmd->add_option("--dim", o.synth.dim);
  synth_cmd->add_option("--sigma", o.synth.sigma);
  synth_cmd->add_option("--frame-sigma", o.synth.frame_sigma);
  synth_cmd->add_option("--common-scale", o.synth.common_scale);
  synth_cmd->add_option("--invalid-fraction", o.synth.invalid_fraction);
  synth_cmd->add_option("--duplicates", o.synth.duplicates);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* sub = app.get_subcommands().front();
    const auto config = resolve_config(o, app, *sub);
    if (sub == dedup_cmd) return run_dedup(o);
    if (sub == validate_cmd) return run_validate(o);
    if (sub == select_cmd) return run_select(config, o);
    if (sub == combine_cmd) return run_combine(config, o);
    if (sub == graph_cmd) return run_graph(config, o);
    if (sub == cluster_cmd) return run_cluster(o);
    if (sub == metrics_cmd) return run_metrics(config, o);
    if (sub == compare_cmd) return run_compare(o);
    if (sub == sweep_cmd) return run_sweep(config, o);
    if (sub == pipeline_cmd) return run_pipeline_cmd(config);
    if (sub == synth_cmd) return run_synth(o);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
