#include <doctest.h>

#include <cmath>
#include <random>

#include "mcvc/frameselect.hpp"
#include "mcvc/synth.hpp"

using namespace mcvc;
using namespace mcvc::frameselect;

namespace {

std::vector<bool> valid_at(std::size_t total, std::initializer_list<std::size_t> ok) {
  std::vector<bool> v(total, false);
  for (auto i : ok) v[i] = true;
  return v;
}

embstore::FrameRecord stats(double gray_std, double brightness, bool corrupted = false) {
  embstore::FrameRecord f;
  f.gray_std = gray_std;
  f.brightness = brightness;
  f.corrupted = corrupted;
  return f;
}

}  // namespace

TEST_CASE("sample count clamps") {
  const SelectionParams d;
  CHECK(plan_sample_count(2.0, d) == 4);
  CHECK(plan_sample_count(50.0, d) == 50);
  CHECK(plan_sample_count(50.9, d) == 50);
  CHECK(plan_sample_count(500.0, d) == 100);
  CHECK(plan_sample_count(0.5, d) == 4);
  SelectionParams twice = d;
  twice.fps = 2.0;
  CHECK(plan_sample_count(30.0, twice) == 60);
  CHECK_THROWS_AS(plan_sample_count(0.0, d), InvalidArgument);
  CHECK_THROWS_AS(plan_sample_count(-3.0, d), InvalidArgument);
}

TEST_CASE("static index examples") {
  CHECK(static_indices(100, 4) == std::vector<std::size_t>{0, 33, 66, 99});
  CHECK(static_indices(1, 7) == std::vector<std::size_t>{0});
  CHECK(static_indices(5, 1) == std::vector<std::size_t>{0});
  CHECK(static_indices(10, 10) == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  CHECK(static_indices(3, 8) == std::vector<std::size_t>{0, 1, 2});
  CHECK_THROWS_AS(static_indices(0, 3), InvalidArgument);
}

TEST_CASE("static indices: endpoints, balanced gaps, formula") {
  for (std::size_t total = 1; total <= 120; ++total) {
    for (std::size_t n = 1; n <= 40; ++n) {
      const auto idx = static_indices(total, n);
      const std::size_t m = std::min(n, total);
      REQUIRE(idx.size() == m);
      CHECK(idx.front() == 0);
      if (m >= 2) {
        CHECK(idx.back() == total - 1);
        std::size_t lo = total, hi = 0;
        for (std::size_t i = 0; i < m; ++i) {
          CHECK(idx[i] == i * (total - 1) / (m - 1));
          if (i > 0) {
            lo = std::min(lo, idx[i] - idx[i - 1]);
            hi = std::max(hi, idx[i] - idx[i - 1]);
          }
        }
        CHECK(hi - lo <= 1);
      }
    }
  }
}

TEST_CASE("frame validation order") {
  const SelectionParams d;
  CHECK_FALSE(validate_frame(stats(50, 128), d).has_value());
  CHECK(validate_frame(stats(3, 128), d) == FrameIssue::kUniform);
  CHECK(validate_frame(stats(50, 252), d) == FrameIssue::kOverexposed);
  CHECK(validate_frame(stats(50, 4.9), d) == FrameIssue::kDark);
  CHECK(validate_frame(stats(50, 128, true), d) == FrameIssue::kCorrupted);
  CHECK(validate_frame(stats(2, 0, true), d) == FrameIssue::kUniform);
  CHECK(validate_frame(stats(20, 300, true), d) == FrameIssue::kOverexposed);
  CHECK_FALSE(validate_frame(stats(10, 5), d).has_value());
  CHECK_FALSE(validate_frame(stats(10, 250), d).has_value());
}

TEST_CASE("repair index examples") {
  CHECK(repair_index(10, valid_at(20, {8, 13})) == 8u);
  CHECK(repair_index(10, valid_at(20, {9, 11})) == 9u);
  CHECK_FALSE(repair_index(10, valid_at(20, {4, 16})).has_value());
  CHECK(repair_index(10, valid_at(20, {5})) == 5u);
  CHECK(repair_index(10, valid_at(20, {15})) == 15u);
  CHECK(repair_index(10, valid_at(20, {10, 9})) == 10u);
  CHECK(repair_index(1, valid_at(4, {3})) == 3u);
  CHECK_THROWS_AS(repair_index(4, valid_at(4, {})), InvalidArgument);
}

TEST_CASE("repair index returns the nearest valid frame inside the window") {
  std::mt19937 rng(17);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t total = 1 + rng() % 40;
    std::vector<bool> valid(total);
    for (std::size_t i = 0; i < total; ++i) valid[i] = rng() % 4 == 0;
    const std::size_t idx = rng() % total;
    const std::size_t window = rng() % 7;
    const auto got = repair_index(idx, valid, window);
    std::optional<std::size_t> want;
    for (std::size_t d = 0; d <= window && !want; ++d) {
      if (idx >= d && valid[idx - d]) {
        want = idx - d;
      } else if (idx + d < total && valid[idx + d]) {
        want = idx + d;
      }
    }
    CHECK(got == want);
    if (got) {
      CHECK(valid[*got]);
      CHECK((*got > idx ? *got - idx : idx - *got) <= window);
    }
  }
}

TEST_CASE("diverse index examples") {
  CHECK(diverse_indices(Matrix::from_rows({{1, 1}, {1, 1}, {1, 1}, {1, 1}}), 3) ==
        std::vector<std::size_t>{0, 1, 2});
  CHECK(diverse_indices(Matrix::from_rows({{1, 0}, {1, 0}, {0, 1}}), 2) ==
        std::vector<std::size_t>{0, 2});
  CHECK(diverse_indices(Matrix::from_rows({{1, 0}, {0, 1}}), 5) ==
        std::vector<std::size_t>{0, 1});
  CHECK(diverse_indices(Matrix::from_rows({{1, 0}, {0.9, 0.1}, {-1, 0}, {0, 1}}), 3) ==
        std::vector<std::size_t>{0, 2, 3});
}

TEST_CASE("diverse indices match exhaustive farthest-point choice") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  for (int t = 0; t < 200; ++t) {
    const std::size_t rows = 1 + rng() % 9, n = 1 + rng() % 6;
    std::vector<std::vector<double>> data(rows, std::vector<double>(3));
    for (auto& r : data) {
      for (auto& x : r) x = g(rng);
    }
    const auto got = diverse_indices(Matrix::from_rows(data), n);
    auto cosd = [&](std::size_t a, std::size_t b) {
      double ab = 0, aa = 0, bb = 0;
      for (int k = 0; k < 3; ++k) {
        ab += data[a][k] * data[b][k];
        aa += data[a][k] * data[a][k];
        bb += data[b][k] * data[b][k];
      }
      return 1.0 - ab / std::sqrt(aa * bb);
    };
    std::vector<std::size_t> chosen{0};
    while (chosen.size() < std::min(n, rows)) {
      std::size_t best = rows;
      double best_d = -1;
      for (std::size_t c = 0; c < rows; ++c) {
        if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
        double d = 1e300;
        for (auto s : chosen) d = std::min(d, cosd(c, s));
        if (d > best_d + 1e-12) {
          best_d = d;
          best = c;
        }
      }
      chosen.push_back(best);
    }
    std::sort(chosen.begin(), chosen.end());
    CHECK(got == chosen);
  }
}

TEST_CASE("plans map stored positions to source indices and skip unusable spots") {
  embstore::EmbeddingStore store;
  store.dim = 2;
  embstore::VideoEntry v;
  v.video_id = "v";
  v.posted_at = "2020-01-01";
  v.duration_s = 12.0;
  v.frame_count_total = 360;
  for (std::uint32_t i = 0; i < 12; ++i) {
    auto f = stats(40, 120);
    f.index = 30 * i;
    f.embedding_row = i;
    v.frames.push_back(f);
    store.matrix.push_back(1.0f);
    store.matrix.push_back(static_cast<float>(i % 3));
  }
  store.manifest.push_back(v);

  SelectionParams p;
  p.n_min = 4;
  p.n_max = 4;
  auto plan = plan_video(store, store.manifest[0], Mode::kStatic, p);
  CHECK(plan.indices == std::vector<std::int64_t>{0, 90, 210, 330});
  CHECK(plan.skipped.empty());

  // Positions 3 and 4 unusable: position 3 repairs to 2.
  store.manifest[0].frames[3].brightness = 0;
  store.manifest[0].frames[4].gray_std = 1;
  plan = plan_video(store, store.manifest[0], Mode::kStatic, p);
  CHECK(plan.indices == std::vector<std::int64_t>{0, 60, 210, 330});

  // Everything unusable: all positions skipped.
  for (auto& f : store.manifest[0].frames) f.brightness = 255;
  plan = plan_video(store, store.manifest[0], Mode::kStatic, p);
  CHECK(plan.indices.empty());
  CHECK(plan.skipped == std::vector<std::int64_t>{0, 90, 210, 330});
  plan = plan_video(store, store.manifest[0], Mode::kDynamic, p);
  CHECK(plan.indices.empty());
}

TEST_CASE("plans over synthetic stores are sorted, unique and use valid frames") {
  synth::SynthParams sp;
  sp.videos = 40;
  sp.invalid_fraction = 0.3;
  sp.seed = 5;
  const auto s = synth::generate(sp).store;
  const SelectionParams p;
  for (Mode mode : {Mode::kStatic, Mode::kDynamic}) {
    const auto plans = plan_store(s, mode, p);
    REQUIRE(plans.size() == s.manifest.size());
    for (std::size_t i = 0; i < plans.size(); ++i) {
      const auto& v = s.manifest[i];
      CHECK(plans[i].video_id == v.video_id);
      CHECK(std::is_sorted(plans[i].indices.begin(), plans[i].indices.end()));
      CHECK(std::adjacent_find(plans[i].indices.begin(), plans[i].indices.end()) ==
            plans[i].indices.end());
      CHECK(plans[i].indices.size() <= plan_sample_count(v.duration_s, p));
      for (auto idx : plans[i].indices) {
        const auto it = std::find_if(v.frames.begin(), v.frames.end(),
                                     [&](auto& f) { return f.index == idx; });
        REQUIRE(it != v.frames.end());
        CHECK_FALSE(validate_frame(*it, p).has_value());
      }
    }
  }
}

TEST_CASE("selection parameter validation and mode names") {
  SelectionParams p;
  CHECK_NOTHROW(p.validate());
  p.n_min = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p.n_min = 200;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.bright_high = 300;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = {};
  p.fps = 0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  CHECK(parse_mode("dynamic") == Mode::kDynamic);
  CHECK(to_string(Mode::kStatic) == "static");
  CHECK_THROWS_AS(parse_mode("random"), InvalidArgument);
}
