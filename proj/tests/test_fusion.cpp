#include <algorithm>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "egosocial/fusion.hpp"
#include "test_util.hpp"

namespace egosocial {
namespace {

using testing::key;
using testing::segment;
using testing::track;

constexpr auto kAvg = FusionMethod::kAverage;
constexpr auto kQw = FusionMethod::kQualityWeighted;

TEST(FuseSegment, QualityLimitsAndArithmetic) {
  EXPECT_EQ(fuse_segment(0.8, 0.1, 1.0, kQw), 0.8);
  EXPECT_EQ(fuse_segment(0.8, 0.1, 0.0, kQw), 0.1);
  EXPECT_DOUBLE_EQ(fuse_segment(0.8, 0.4, 0.5, kQw), 0.6);
  EXPECT_DOUBLE_EQ(fuse_segment(0.8, 0.4, 0.0, kAvg), 0.6);
}

TEST(FuseSegment, RejectsOutOfRangeInputs) {
  EXPECT_THROW(fuse_segment(1.1, 0.5, 0.5, kAvg), std::invalid_argument);
  EXPECT_THROW(fuse_segment(0.5, -0.1, 0.5, kAvg), std::invalid_argument);
  EXPECT_THROW(fuse_segment(0.5, 0.5, 2.0, kQw), std::invalid_argument);
  EXPECT_THROW(fuse_segment(std::nan(""), 0.5, 0.5, kQw), std::invalid_argument);
}

TEST(FuseSegment, ConvexMonotoneAndHalfQualityIsAverage) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 20000; ++i) {
    const double v = u(rng), a = u(rng), q = u(rng), dv = u(rng) * (1.0 - v);
    for (auto m : {kAvg, kQw}) {
      const double f = fuse_segment(v, a, q, m);
      ASSERT_GE(f, std::min(v, a));
      ASSERT_LE(f, std::max(v, a));
      ASSERT_GE(fuse_segment(v + dv, a, q, m), f);
      ASSERT_GE(fuse_segment(a, v + dv, q, m), fuse_segment(a, v, q, m));
    }
    ASSERT_EQ(fuse_segment(v, a, 0.5, kQw), fuse_segment(v, a, 0.5, kAvg));
  }
}

Dataset one_segment_dataset() {
  Dataset ds;
  ds.scores["visual"] = {track({0.2, 0.9}, 0)};
  ds.segments = {segment(0, 1, 0.5, true)};
  ds.quality = {QualityTrack{key(), {{0, 0.4}, {1, 0.6}}}};
  return ds;
}

// Hand composition: max(0.2, 0.9) = 0.9; mean quality 0.5;
// 0.5 * 0.9 + 0.5 * 0.5 = 0.7 on both frames.
TEST(FuseTtm, ComposesPerSegmentSteps) {
  auto ds = one_segment_dataset();
  auto r = fuse_ttm(ds, "visual", {kQw, MedianConfig(5), MedianStage::kFused});
  ASSERT_EQ(r.tracks.size(), 1u);
  ASSERT_EQ(r.tracks[0].entries.size(), 2u);
  for (const auto& e : r.tracks[0].entries) EXPECT_DOUBLE_EQ(e.score, 0.7);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(FuseTtm, AverageWithoutQualityEqualsHalfQualityWeighting) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset ds;
  ds.scores["visual"] = {testing::random_track(rng, 200)};
  ds.segments = {segment(0, 30, u(rng)), segment(40, 90, u(rng)), segment(120, 300, u(rng))};
  auto avg = fuse_ttm(ds, "visual", {kAvg, MedianConfig(5), MedianStage::kFused});

  Dataset half = ds;
  QualityTrack q{key(), {}};
  for (Frame f = 0; f < 400; ++f) q.entries.push_back({f, 0.5});
  half.quality = {q};
  auto qw = fuse_ttm(half, "visual", {kQw, MedianConfig(5), MedianStage::kFused});
  EXPECT_EQ(avg.tracks, qw.tracks);
}

TEST(FuseTtm, EmptyDatasetGivesEmptyOutput) {
  Dataset ds;
  ds.scores["visual"] = {};
  EXPECT_TRUE(fuse_ttm(ds, "visual", {kAvg, MedianConfig(), MedianStage::kFused}).tracks.empty());
}

TEST(FuseTtm, ErrorsAndWarnings) {
  auto ds = one_segment_dataset();
  EXPECT_THROW(fuse_ttm(ds, "nope", {}), ConfigError);
  auto no_quality = ds;
  no_quality.quality.clear();
  EXPECT_THROW(fuse_ttm(no_quality, "visual", {kQw, MedianConfig(), MedianStage::kFused}),
               ConfigError);

  // Visual track with no segments is reported.
  auto extra = ds;
  extra.scores["visual"].push_back(track({0.5}, 0, key("c0", "p1")));
  auto r = fuse_ttm(extra, "visual", {kAvg, MedianConfig(), MedianStage::kFused});
  ASSERT_FALSE(r.warnings.empty());
  EXPECT_NE(r.warnings[0].find("no segments"), std::string::npos);
}

TEST(FuseTtm, MissingAudioFallsBackToVisual) {
  auto ds = one_segment_dataset();
  ds.segments[0].audio_score.reset();
  auto r = fuse_ttm(ds, "visual", {kQw, MedianConfig(1), MedianStage::kFused});
  EXPECT_EQ(r.segments_without_audio, 1u);
  for (const auto& e : r.tracks[0].entries) EXPECT_EQ(e.score, 0.9);
  EXPECT_FALSE(r.warnings.empty());
}

TEST(FuseTtm, UncoveredSegmentUsesZeroVisual) {
  Dataset ds;
  ds.scores["visual"] = {track({0.9}, 0)};
  ds.segments = {segment(50, 51, 0.6)};
  auto r = fuse_ttm(ds, "visual", {kAvg, MedianConfig(1), MedianStage::kNone});
  EXPECT_EQ(r.segments_without_visual, 1u);
  EXPECT_DOUBLE_EQ(r.tracks[0].entries[0].score, 0.3);
}

TEST(FuseTtm, MedianStageSelection) {
  // An isolated spike in the visual track wins the max unless smoothed first.
  Dataset ds;
  ds.scores["visual"] = {track({0.1, 0.1, 0.95, 0.1, 0.1}, 0)};
  ds.segments = {segment(0, 4, 0.5)};
  auto fused = fuse_ttm(ds, "visual", {kAvg, MedianConfig(3), MedianStage::kFused});
  auto visual = fuse_ttm(ds, "visual", {kAvg, MedianConfig(3), MedianStage::kVisual});
  EXPECT_DOUBLE_EQ(fused.tracks[0].entries[0].score, (0.95 + 0.5) / 2);
  EXPECT_DOUBLE_EQ(visual.tracks[0].entries[0].score, (0.1 + 0.5) / 2);
}

TEST(Ensemble, IdenticalTracksAreFixed) {
  auto t = track({0.1, 0.5, 0.77});
  auto r = ensemble_tracks({t, t}, {{"a", "b"}, {}});
  EXPECT_EQ(r.track, t);
  auto r3 = ensemble_tracks({t, t, t}, {{"a", "b", "c"}, {}});
  EXPECT_EQ(r3.track, t);
}

TEST(Ensemble, ArithmeticAndDegenerateWeights) {
  auto a = track({0.2});
  auto b = track({0.8});
  EXPECT_DOUBLE_EQ(ensemble_tracks({a, b}, {{"a", "b"}, {}}).track.entries[0].score, 0.5);
  auto x = track({0.13, 0.91, 0.4});
  auto y = track({0.7, 0.2, 0.99});
  EXPECT_EQ(ensemble_tracks({x, y}, {{"x", "y"}, {1.0, 0.0}}).track, x);
}

TEST(Ensemble, SpecErrors) {
  auto t = track({0.5});
  EXPECT_THROW(ensemble_tracks({}, {{}, {}}), ConfigError);
  EXPECT_THROW(ensemble_tracks({t}, {{"a"}, {1.0, 2.0}}), ConfigError);
  EXPECT_THROW(ensemble_tracks({t, t}, {{"a", "b"}, {0.0, 0.0}}), ConfigError);
  EXPECT_THROW(ensemble_tracks({t, t}, {{"a", "b"}, {-1.0, 2.0}}), ConfigError);
  EXPECT_THROW(ensemble_tracks({t, track({0.5}, 0, key("c0", "zz"))}, {{"a", "b"}, {}}),
               std::invalid_argument);
}

TEST(Ensemble, AlignmentModes) {
  auto a = track({0.2, 0.4, 0.6}, 0);
  auto b = track({0.8, 0.8, 0.8}, 1);
  EXPECT_THROW(ensemble_tracks({a, b}, {{"a", "b"}, {}}, AlignMode::kStrict),
               std::invalid_argument);
  auto r = ensemble_tracks({a, b}, {{"a", "b"}, {}}, AlignMode::kIntersect);
  EXPECT_EQ(r.dropped_frames, 2u);
  ASSERT_EQ(r.track.entries.size(), 2u);
  EXPECT_EQ(r.track.entries[0].frame, 1);
  EXPECT_DOUBLE_EQ(r.track.entries[0].score, 0.6);
}

TEST(Ensemble, PermutationInvariantAndBounded) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t m = 2 + iter % 4;
    std::vector<FrameScoreTrack> tracks;
    EnsembleSpec spec;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> s(30);
      for (auto& x : s) x = u(rng);
      tracks.push_back(track(s));
      spec.sources.push_back("s" + std::to_string(i));
      spec.weights.push_back(u(rng) + 0.01);
    }
    const auto base = ensemble_tracks(tracks, spec).track;

    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<FrameScoreTrack> p_tracks;
    EnsembleSpec p_spec;
    for (auto i : perm) {
      p_tracks.push_back(tracks[i]);
      p_spec.sources.push_back(spec.sources[i]);
      p_spec.weights.push_back(spec.weights[i]);
    }
    ASSERT_EQ(ensemble_tracks(p_tracks, p_spec).track, base);

    for (std::size_t f = 0; f < base.entries.size(); ++f) {
      double lo = 1, hi = 0;
      for (const auto& t : tracks) {
        lo = std::min(lo, t.entries[f].score);
        hi = std::max(hi, t.entries[f].score);
      }
      ASSERT_GE(base.entries[f].score, lo);
      ASSERT_LE(base.entries[f].score, hi);
    }
  }
}

// Scaling is exact when the scaled weights are exactly representable
// multiples: integer weights times an integer, or any weights times 2^k.
TEST(Ensemble, WeightScalingIsBitIdentical) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> small(0, 9);
  for (int iter = 0; iter < 200; ++iter) {
    std::vector<FrameScoreTrack> tracks;
    EnsembleSpec spec;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> s(20);
      for (auto& x : s) x = u(rng);
      tracks.push_back(track(s));
      spec.sources.push_back("s" + std::to_string(i));
      spec.weights.push_back(iter % 2 == 0 ? small(rng) + 1.0 : u(rng) + 0.1);
    }
    const auto base = ensemble_tracks(tracks, spec).track;
    for (double c : {2.0, 0.25, 1024.0, 3.0, 7.0}) {
      if (iter % 2 == 1 && (c == 3.0 || c == 7.0)) continue;
      EnsembleSpec scaled = spec;
      for (auto& w : scaled.weights) w *= c;
      ASSERT_EQ(ensemble_tracks(tracks, scaled).track, base) << "scale " << c;
    }
  }
}

TEST(EnsembleSources, KeyCoverageByMode) {
  Dataset ds;
  ds.scores["a"] = {track({0.1}, 0, key("c0", "p0")), track({0.3}, 0, key("c0", "p1"))};
  ds.scores["b"] = {track({0.5}, 0, key("c0", "p0"))};
  EnsembleSpec spec{{"a", "b"}, {}};
  EXPECT_THROW(ensemble_sources(ds, spec, AlignMode::kStrict), std::invalid_argument);
  auto r = ensemble_sources(ds, spec, AlignMode::kIntersect);
  ASSERT_EQ(r.tracks.size(), 1u);
  EXPECT_DOUBLE_EQ(r.tracks[0].entries[0].score, 0.3);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_THROW(ensemble_sources(ds, {{"a", "zzz"}, {}}), ConfigError);
}

}  // namespace
}  // namespace egosocial
