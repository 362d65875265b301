// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mcvc/artifacts.hpp"
#include "mcvc/combine.hpp"
#include "mcvc/frameselect.hpp"
#include "mcvc/metrics.hpp"
#include "mcvc/multicut.hpp"
#include "mcvc/pipeline.hpp"
#include "mcvc/simgraph.hpp"
#include "mcvc/synth.hpp"
#include "oracles.hpp"

using namespace mcvc;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kCompositeTol = 0.001;
constexpr double kGiniTol = 0.001;
constexpr double kSingletonPctTol = 0.01;
constexpr double kCompositeBudgetS = 1.0;
constexpr int kOracleGraphs = 100;
constexpr int kOracleMinMatches = 90;
constexpr double kObjectiveMatchTol = 1e-9;
constexpr double kOracleBudgetS = 10.0;
constexpr double kRecoveryBudgetS = 30.0;
constexpr double kLowCalMinSingletons = 0.95;
constexpr int kFuzzInputs = 1000;
constexpr double kWeightSumTol = 1e-9;
constexpr double kHighTau = 1e6;
constexpr double kHighTauTol = 1e-6;
constexpr double kRescaleTol = 1e-9;
constexpr double kViTol = 1e-9;
constexpr double kOverlapRowTol = 1e-6;
constexpr double kChiSquareTol = 1e-9;

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok && pass_) {
      pass_ = false;
      first_failure_ = what;
    }
    if (!ok) ++failures_;
  }
  Outcome done(const std::string& summary) const {
    if (pass_) return {true, summary};
    return {false, summary + "; " + std::to_string(failures_) + " failed, first: " + first_failure_};
  }

 private:
  bool pass_ = true;
  int failures_ = 0;
  std::string first_failure_;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome composite_goldens() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  struct Row {
    metrics::CompositeInputs in;
    double want;
  };
  const Row rows[] = {
      {{-1, 10, 0, 0, 1, 0}, 0.300},
      {{-1, 10, 0, 0.666, 1, 0.6667}, 0.167},
      {{0.081, 2.096, 25.30, 0.923, 0.9707, 0.2955}, 0.519},
      {{-0.022, 2.495, 8.151, 0.882, 0.8865, 0.1392}, 0.478},
  };
  std::string got;
  for (const auto& r : rows) {
    const double v = metrics::composite_score(r.in);
    got += fmt(" %.4f", v);
    c.require(std::abs(v - r.want) <= kCompositeTol, "row " + fmt("%.3f", r.want) + " got " + fmt("%.6f", v));
  }
  const double elapsed = seconds_since(t0);
  c.require(elapsed < kCompositeBudgetS, "runtime " + fmt("%.3fs", elapsed));
  return c.done("scores" + got + ", " + fmt("%.4fs", elapsed));
}

Outcome cluster_stats_goldens() {
  Check c;
  const std::vector<std::size_t> s{2968, 1, 1};
  const auto st = metrics::cluster_stats(s);
  const double g = metrics::gini(s);
  const double sing = 100.0 * metrics::singleton_ratio(s);
  const double cov = 100.0 * metrics::coverage_top10(s);
  c.require(std::abs(g - 0.666) <= kGiniTol, "gini " + fmt("%.6f", g));
  c.require(std::abs(sing - 66.67) <= kSingletonPctTol, "singletons " + fmt("%.4f", sing));
  c.require(cov == 100.0, "top-10 coverage " + fmt("%.4f", cov));
  c.require(st.mean == 990.0, "mean " + fmt("%.4f", st.mean));
  c.require(st.median == 1.0, "median " + fmt("%.4f", st.median));
  const std::vector<std::size_t> one{2970};
  c.require(metrics::gini(one) == 0.0, "single-cluster gini");
  c.require(metrics::coverage_top10(one) == 1.0, "single-cluster coverage");
  return c.done("gini " + fmt("%.4f", g) + ", singletons " + fmt("%.2f%%", sing) +
                ", mean " + fmt("%.1f", st.mean) + ", median " + fmt("%.1f", st.median));
}

Outcome solver_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  int matches = 0;
  for (int seed = 0; seed < kOracleGraphs; ++seed) {
    std::mt19937_64 rng(static_cast<std::uint64_t>(seed));
    std::normal_distribution<double> normal;
    std::vector<double> w(simgraph::CostGraph::edge_count(6));
    for (auto& x : w) x = normal(rng);
    const simgraph::CostGraph g(6, w);
    const auto exact = multicut::brute_force(g);
    const auto greedy = multicut::gaec(g);
    const auto refined = multicut::solve(g);
    const auto& lab = refined.clustering.labels();
    bool feasible = lab.size() == 6;
    for (std::size_t i = 0; i < lab.size(); ++i) feasible = feasible && lab[i] < refined.clustering.k();
    const double recomputed = oracle::cut_cost(6, lab, [&](auto u, auto v) { return g.cost(u, v); });
    c.require(feasible, "infeasible labels for seed " + std::to_string(seed));
    c.require(std::abs(recomputed - refined.objective) <= kObjectiveMatchTol,
              "objective mismatch for seed " + std::to_string(seed));
    c.require(refined.objective <= greedy.objective + kObjectiveMatchTol,
              "worse than gaec for seed " + std::to_string(seed));
    if (std::abs(refined.objective - exact.objective) <= kObjectiveMatchTol) ++matches;
  }
  const double elapsed = seconds_since(t0);
  c.require(matches >= kOracleMinMatches, "matches " + std::to_string(matches));
  c.require(elapsed < kOracleBudgetS, "runtime " + fmt("%.3fs", elapsed));
  return c.done(std::to_string(matches) + "/" + std::to_string(kOracleGraphs) +
                " optimal, never worse than gaec, " + fmt("%.3fs", elapsed));
}

// Planted store shared by the recovery and calibration criteria.
struct Planted {
  fs::path store;
  std::map<std::string, std::size_t> blob_of;
};

Planted make_planted(const fs::path& root) {
  synth::SynthParams p;
  p.videos = 200;
  p.clusters = 4;
  p.seed = 2024;
  const auto s = synth::generate(p);
  Planted out;
  out.store = root / "store";
  embstore::write_store(s.store, out.store);
  for (std::size_t i = 0; i < s.store.manifest.size(); ++i) {
    out.blob_of[s.store.manifest[i].video_id] = s.planted[i];
  }
  return out;
}

std::vector<std::size_t> planted_labels(const Planted& planted, const std::vector<std::string>& ids) {
  std::vector<std::size_t> labels;
  for (const auto& id : ids) labels.push_back(planted.blob_of.at(id));
  return labels;
}

Outcome planted_recovery(const Planted& planted, const fs::path& root) {
  const auto t0 = std::chrono::steady_clock::now();
  Check c;
  pipeline::PipelineConfig cfg;
  cfg.store_dir = planted.store;
  cfg.out_dir = root / "recovery";
  cfg.combine = combine::CombineParams::defaults_for(combine::Method::kAverage);
  cfg.cals = pipeline::parse_cal_list("0.1:0.9:0.1");
  const auto result = pipeline::run_pipeline(cfg);
  const auto& best = result.rows[pipeline::best_row(result.rows)];
  const auto clusters = artifacts::read_clusters(
      cfg.out_dir / ("clusters" + pipeline::cal_suffix(best.cal) + ".json"));
  const auto truth = planted_labels(planted, clusters.video_ids);
  const double ari = oracle::adjusted_rand_index(clusters.clustering.labels(), truth);
  const double elapsed = seconds_since(t0);
  c.require(clusters.video_ids.size() == 200, "videos clustered " + std::to_string(clusters.video_ids.size()));
  c.require(ari == 1.0, "ARI " + fmt("%.6f", ari));
  c.require(elapsed < kRecoveryBudgetS, "runtime " + fmt("%.3fs", elapsed));
  return c.done("best cal " + fmt("%g", best.cal) + ", k=" + std::to_string(best.clusters) +
                ", ARI " + fmt("%.6f", ari) + ", " + fmt("%.3fs", elapsed));
}

Outcome calibration_direction(const Planted& planted, const fs::path& root) {
  Check c;
  // Edge signs on fixed similarity matrices.
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  std::size_t edges_checked = 0;
  for (int t = 0; t < 20; ++t) {
    Matrix m(30, 5);
    for (std::size_t i = 0; i < 30; ++i) {
      for (std::size_t j = 0; j < 5; ++j) m(i, j) = normal(rng);
    }
    const auto sim = simgraph::cosine_matrix(m);
    std::vector<double> cals;
    for (int k = 1; k <= 99; ++k) cals.push_back(k / 100.0);
    auto prev = simgraph::calibrate(sim, cals.front());
    for (std::size_t k = 1; k < cals.size(); ++k) {
      const auto g = simgraph::calibrate(sim, cals[k]);
      for (std::size_t e = 0; e < g.costs().size(); ++e) {
        c.require(g.costs()[e] >= prev.costs()[e], "cost decreased as cal rose");
        c.require(!(prev.costs()[e] > 0 && g.costs()[e] <= 0), "attractive edge turned repulsive");
        ++edges_checked;
      }
      prev = g;
    }
  }

  auto run_at = [&](double cal, const std::string& name) {
    pipeline::PipelineConfig cfg;
    cfg.store_dir = planted.store;
    cfg.out_dir = root / name;
    cfg.cals = {cal};
    return pipeline::run_pipeline(cfg).rows.front();
  };
  const auto high = run_at(0.99, "cal_high");
  const auto low = run_at(0.01, "cal_low");
  c.require(high.clusters == 1, "cal 0.99 gave " + std::to_string(high.clusters) + " clusters");
  c.require(low.singletons_pct >= 100.0 * kLowCalMinSingletons,
            "cal 0.01 singletons " + fmt("%.2f%%", low.singletons_pct));
  return c.done(std::to_string(edges_checked) + " edge steps monotone; cal 0.99 -> " +
                std::to_string(high.clusters) + " cluster; cal 0.01 -> " +
                std::to_string(low.clusters) + " clusters, " + fmt("%.2f%%", low.singletons_pct) +
                " singletons");
}

Outcome combination_properties() {
  using combine::Method;
  Check c;
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> coord(-1.0, 1.0), conf(0.0, 1.0), scale(0.01, 100.0);
  const Method weighted[] = {Method::kWeightedDiversity, Method::kWeightedConfidence,
                             Method::kTemporalCoherence};
  const Method all[] = {Method::kAverage, Method::kMaxConfidence, Method::kWeightedDiversity,
                        Method::kWeightedConfidence, Method::kTemporalCoherence};
  double worst_sum = 0, worst_tau = 0, worst_rescale = 0;

  for (int t = 0; t < kFuzzInputs; ++t) {
    const std::size_t n = 1 + rng() % 12, d = 1 + rng() % 16;
    Matrix f(n, d);
    for (std::size_t i = 0; i < n; ++i) {
      do {
        for (std::size_t j = 0; j < d; ++j) f(i, j) = coord(rng);
      } while (norm(f.row(i)) == 0.0);
    }
    std::vector<double> confidences(n);
    for (auto& x : confidences) x = conf(rng);
    const std::size_t radius = 1 + rng() % 3;
    const std::string where = " (input " + std::to_string(t) + ")";

    // Weights positive and normalised.
    for (Method m : weighted) {
      auto p = combine::CombineParams::defaults_for(m);
      p.radius = radius;
      const auto e = combine::combine(f, confidences, p);
      double sum = 0;
      bool positive = e.weights.size() == n;
      for (double w : e.weights) {
        positive = positive && w > 0;
        sum += w;
      }
      worst_sum = std::max(worst_sum, std::abs(sum - 1));
      c.require(positive, std::string(combine::to_string(m)) + " non-positive weight" + where);
      c.require(std::abs(sum - 1) <= kWeightSumTol, std::string(combine::to_string(m)) + " weight sum" + where);
    }

    // N = 1 identity.
    {
      Matrix one(1, d);
      std::copy(f.row(0).begin(), f.row(0).end(), one.row(0).begin());
      for (Method m : all) {
        auto p = combine::CombineParams::defaults_for(m);
        p.radius = radius;
        const auto e = combine::combine(one, std::vector<double>{confidences[0]}, p);
        c.require(std::equal(e.vector.begin(), e.vector.end(), one.row(0).begin()),
                  std::string(combine::to_string(m)) + " N=1 identity" + where);
      }
    }

    // High temperature converges to the average.
    const auto avg = combine::combine_average(f).vector;
    for (Method m : weighted) {
      auto p = combine::CombineParams::defaults_for(m);
      p.radius = radius;
      p.tau = kHighTau;
      const auto e = combine::combine(f, confidences, p);
      double linf = 0;
      for (std::size_t j = 0; j < d; ++j) linf = std::max(linf, std::abs(e.vector[j] - avg[j]));
      worst_tau = std::max(worst_tau, linf);
      c.require(linf <= kHighTauTol, std::string(combine::to_string(m)) + " tau=1e6 L-inf " +
                                         fmt("%.3g", linf) + where);
    }

    // Cosine-based methods ignore a uniform positive rescaling.
    const double k = scale(rng);
    Matrix fk = f;
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& x : fk.row(i)) x *= k;
    }
    for (Method m : {Method::kWeightedDiversity, Method::kTemporalCoherence}) {
      auto p = combine::CombineParams::defaults_for(m);
      p.radius = radius;
      const auto a = combine::combine(f, std::nullopt, p);
      const auto b = combine::combine(fk, std::nullopt, p);
      double dev = 0;
      for (std::size_t i = 0; i < n; ++i) dev = std::max(dev, std::abs(a.weights[i] - b.weights[i]));
      for (std::size_t j = 0; j < d; ++j) {
        dev = std::max(dev, std::abs(a.vector[j] * k - b.vector[j]) / std::max(1.0, k));
      }
      worst_rescale = std::max(worst_rescale, dev);
      c.require(dev <= kRescaleTol, std::string(combine::to_string(m)) + " rescaling" + where);
    }

    // Max confidence returns the argmax frame bit for bit.
    {
      const auto e = combine::combine_max_confidence(f, confidences);
      std::size_t best = 0;
      for (std::size_t i = 1; i < n; ++i) {
        if (confidences[i] > confidences[best]) best = i;
      }
      c.require(std::equal(e.vector.begin(), e.vector.end(), f.row(best).begin()) &&
                    e.vector.size() == d,
                "max_confidence argmax" + where);
    }
  }
  return c.done(std::to_string(kFuzzInputs) + " inputs x 5 methods; max |sum-1| " +
                fmt("%.2g", worst_sum) + ", max tau L-inf " + fmt("%.2g", worst_tau) +
                ", max rescale dev " + fmt("%.2g", worst_rescale));
}

Outcome frame_formulas() {
  Check c;
  using frameselect::repair_index;
  c.require(frameselect::static_indices(100, 4) == std::vector<std::size_t>{0, 33, 66, 99},
            "static_indices(100, 4)");
  const frameselect::SelectionParams d;
  c.require(frameselect::plan_sample_count(2.0, d) == 4, "count at 2 s");
  c.require(frameselect::plan_sample_count(50.0, d) == 50, "count at 50 s");
  c.require(frameselect::plan_sample_count(500.0, d) == 100, "count at 500 s");
  std::vector<bool> v(20, false);
  v[8] = v[13] = true;
  c.require(repair_index(10, v, 5) == std::optional<std::size_t>(8), "nearest valid");
  v.assign(20, false);
  v[9] = v[11] = true;
  c.require(repair_index(10, v, 5) == std::optional<std::size_t>(9), "tie to earlier");
  v.assign(20, false);
  v[4] = v[16] = true;
  c.require(!repair_index(10, v, 5).has_value(), "empty window skips");
  v.assign(20, false);
  v[5] = true;
  c.require(repair_index(10, v, 5) == std::optional<std::size_t>(5), "window edge -5");
  v.assign(20, false);
  v[15] = true;
  c.require(repair_index(10, v, 5) == std::optional<std::size_t>(15), "window edge +5");
  return c.done("static [0,33,66,99], counts 4/50/100, repair 8/9/skip/5/15");
}

Outcome comparison_properties() {
  Check c;
  using L = std::vector<std::size_t>;
  std::mt19937_64 rng(808);
  double worst_ln = 0, worst_row = 0;
  for (std::size_t n = 1; n <= 200; ++n) {
    L one(n, 0), singles(n);
    std::iota(singles.begin(), singles.end(), 0);
    const double vi = metrics::variation_of_information(one, singles);
    worst_ln = std::max(worst_ln, std::abs(vi - std::log(static_cast<double>(n))));
    c.require(std::abs(vi - std::log(static_cast<double>(n))) <= kViTol, "VI ln n at n=" + std::to_string(n));
  }
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng() % 80;
    L a(n), b(n);
    for (auto& x : a) x = rng() % (1 + rng() % 7);
    for (auto& x : b) x = rng() % (1 + rng() % 7);
    c.require(metrics::variation_of_information(a, a) == 0.0, "VI(A,A)");
    c.require(metrics::variation_of_information(a, b) == metrics::variation_of_information(b, a), "VI symmetry");
    for (const auto& row : metrics::overlap_matrix(a, b)) {
      const double sum = std::accumulate(row.begin(), row.end(), 0.0);
      worst_row = std::max(worst_row, std::abs(sum - 100.0));
      c.require(std::abs(sum - 100.0) <= kOverlapRowTol, "overlap row sum");
    }
  }
  // Proportional tables: every row a multiple of the same profile.
  for (int t = 0; t < 200; ++t) {
    const std::size_t rows = 2 + rng() % 4, cols = 2 + rng() % 4;
    std::vector<double> profile(cols);
    for (auto& x : profile) x = 1 + static_cast<double>(rng() % 9);
    std::vector<std::vector<double>> table(rows);
    for (auto& r : table) {
      const double m = 1 + static_cast<double>(rng() % 5);
      for (double p : profile) r.push_back(m * p);
    }
    const auto chi = metrics::chi_square(table);
    c.require(chi && std::abs(*chi) <= kChiSquareTol, "chi-square on proportional table");
  }
  const auto twenty = metrics::chi_square({{10, 0}, {0, 10}});
  c.require(twenty && std::abs(*twenty - 20.0) <= kChiSquareTol, "chi-square [[10,0],[0,10]]");
  return c.done("max |VI-ln n| " + fmt("%.2g", worst_ln) + ", max |row-100| " + fmt("%.2g", worst_row) +
                ", chi2 " + fmt("%.6f", twenty.value_or(-1)));
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MCVC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const fs::path& root) {
  Check c;
  const std::string store = (root / "det_store").string();
  c.require(run_cli("synth --videos 120 --clusters 5 --duplicates 4 --seed 31 --out " + store) == 0,
            "synth failed");
  std::ofstream(root / "det.conf") << "store = " << store << "\n"
                                   << "mode = dynamic\n"
                                   << "method = temporal_coherence\n"
                                   << "cal = 0.2:0.8:0.2\n"
                                   << "seed = 31\n";
  const std::string conf = (root / "det.conf").string();
  const std::vector<std::pair<std::string, unsigned>> runs{{"det_t1", 1}, {"det_t8", 8}, {"det_t1b", 1}};
  for (const auto& [name, threads] : runs) {
    c.require(run_cli("pipeline --config " + conf + " --threads " + std::to_string(threads) +
                      " --out " + (root / name).string()) == 0,
              "pipeline run " + name + " failed");
  }
  std::size_t compared = 0;
  for (const auto& entry : fs::directory_iterator(root / "det_t1")) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("clusters", 0) != 0 && name.rfind("report", 0) != 0 && name != "sweep.json") continue;
    const std::string a = slurp(entry.path());
    for (const char* other : {"det_t8", "det_t1b"}) {
      c.require(fs::exists(root / other / name) && slurp(root / other / name) == a,
                name + " differs in " + other);
    }
    ++compared;
  }
  c.require(compared == 9, "expected 9 cluster/report/sweep files, found " + std::to_string(compared));
  return c.done(std::to_string(compared) + " cluster/report files byte-identical across threads 1, 8 and a repeat run");
}

}  // namespace

int main() {
  const fs::path root = oracle::temp_dir("acceptance");
  int failed = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s  %-32s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  };

  Planted planted;
  try {
    planted = make_planted(root);
  } catch (const std::exception& e) {
    std::printf("FAIL  planted store generation: %s\n", e.what());
    return 1;
  }

  report("composite-score goldens", composite_goldens);
  report("cluster-stats goldens", cluster_stats_goldens);
  report("solver-oracle equivalence", solver_oracle);
  report("planted-cluster recovery", [&] { return planted_recovery(planted, root); });
  report("calibration monotone direction", [&] { return calibration_direction(planted, root); });
  report("combination property suite", combination_properties);
  report("frame-formula exactness", frame_formulas);
  report("comparison-suite properties", comparison_properties);
  report("determinism", [&] { return determinism(root); });

  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
