#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "egosocial/io.hpp"
#include "egosocial/synth.hpp"
#include "test_util.hpp"

namespace egosocial {
namespace {

using testing::key;

std::vector<FrameScoreTrack> scores_from(const std::string& text,
                                         InputFormat fmt = InputFormat::kJsonl) {
  std::istringstream in(text);
  return parse_score_file(in, fmt);
}

std::vector<UtteranceSegment> segments_from(const std::string& text,
                                            InputFormat fmt = InputFormat::kJsonl) {
  std::istringstream in(text);
  return parse_segment_file(in, fmt);
}

TEST(ParseScores, SortsEntriesWithinTrack) {
  auto tracks = scores_from(
      R"({"clip_id":"a","person_id":"p","frame":5,"score":0.5})"
      "\n"
      R"({"clip_id":"a","person_id":"p","frame":3,"score":0.25})"
      "\n");
  ASSERT_EQ(tracks.size(), 1u);
  ASSERT_EQ(tracks[0].entries.size(), 2u);
  EXPECT_EQ(tracks[0].entries[0], (ScoreEntry{3, 0.25}));
  EXPECT_EQ(tracks[0].entries[1], (ScoreEntry{5, 0.5}));
}

TEST(ParseScores, RejectsScoreAboveOneWithLineAndField) {
  try {
    scores_from(
        R"({"clip_id":"a","person_id":"p","frame":0,"score":0.5})"
        "\n"
        R"({"clip_id":"a","person_id":"p","frame":1,"score":1.2})"
        "\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("score"), std::string::npos);
  }
}

TEST(ParseScores, EmptyInputGivesNoTracks) {
  EXPECT_TRUE(scores_from("").empty());
  EXPECT_TRUE(scores_from("\n\n").empty());
}

TEST(ParseScores, DuplicateFrameIsAnError) {
  EXPECT_THROW(scores_from(R"({"clip_id":"a","person_id":"p","frame":1,"score":0.5})"
                           "\n"
                           R"({"clip_id":"a","person_id":"p","frame":1,"score":0.6})"),
               ParseError);
}

TEST(ParseScores, MalformedRecords) {
  EXPECT_THROW(scores_from("not json"), ParseError);
  EXPECT_THROW(scores_from("[1,2]"), ParseError);
  EXPECT_THROW(scores_from(R"({"clip_id":"a","person_id":"p","frame":1})"), ParseError);
  EXPECT_THROW(scores_from(R"({"clip_id":"a","person_id":"p","frame":1.5,"score":0.1})"),
               ParseError);
  EXPECT_THROW(scores_from(R"({"clip_id":"a","person_id":"p","frame":-1,"score":0.1})"),
               ParseError);
  EXPECT_THROW(scores_from(R"({"clip_id":"","person_id":"p","frame":1,"score":0.1})"),
               ParseError);
  EXPECT_THROW(scores_from(R"({"clip_id":"a,b","person_id":"p","frame":1,"score":0.1})"),
               ParseError);
  EXPECT_THROW(scores_from(R"({"clip_id":7,"person_id":"p","frame":1,"score":0.1})"),
               ParseError);
}

TEST(ParseScores, CsvMapsToSameRecords) {
  auto csv = scores_from("clip_id,person_id,frame,score\na,p,2,0.75\na,p,1,0.5\n",
                         InputFormat::kCsv);
  auto jsonl = scores_from(R"({"clip_id":"a","person_id":"p","frame":2,"score":0.75})"
                           "\n"
                           R"({"clip_id":"a","person_id":"p","frame":1,"score":0.5})");
  EXPECT_EQ(csv, jsonl);
  // Numeric-looking identifiers stay strings.
  auto numeric = scores_from("clip_id,person_id,frame,score\n001,2,0,0.1\n", InputFormat::kCsv);
  EXPECT_EQ(numeric[0].key, (TrackKey{"001", "2"}));
  EXPECT_THROW(scores_from("clip_id,person_id,frame,score\na,p,x,0.1\n", InputFormat::kCsv),
               ParseError);
  EXPECT_THROW(scores_from("clip_id,person_id,frame,score\na,p,1\n", InputFormat::kCsv),
               ParseError);
}

TEST(ParseSegments, AdjacentSegmentsAccepted) {
  auto segs = segments_from(
      R"({"clip_id":"a","person_id":"p","start_frame":0,"end_frame":10,"audio_score":0.4,"label":1})"
      "\n"
      R"({"clip_id":"a","person_id":"p","start_frame":11,"end_frame":20})");
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].audio_score, 0.4);
  EXPECT_EQ(segs[0].label, true);
  EXPECT_FALSE(segs[1].audio_score.has_value());
  EXPECT_FALSE(segs[1].label.has_value());
}

TEST(ParseSegments, SharedBoundaryFrameOverlaps) {
  try {
    segments_from(R"({"clip_id":"a","person_id":"p","start_frame":10,"end_frame":20})"
                  "\n"
                  R"({"clip_id":"a","person_id":"p","start_frame":0,"end_frame":10})");
    FAIL() << "expected overlap error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("overlaps"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("lines 1 and 2"), std::string::npos);
  }
}

TEST(ParseSegments, OverlapOnlyMattersWithinAKey) {
  auto segs = segments_from(
      R"({"clip_id":"a","person_id":"p","start_frame":0,"end_frame":10})"
      "\n"
      R"({"clip_id":"a","person_id":"q","start_frame":5,"end_frame":15})");
  EXPECT_EQ(segs.size(), 2u);
}

TEST(ParseSegments, InvertedIntervalAndBadLabel) {
  EXPECT_THROW(segments_from(R"({"clip_id":"a","person_id":"p","start_frame":5,"end_frame":4})"),
               ParseError);
  EXPECT_THROW(
      segments_from(R"({"clip_id":"a","person_id":"p","start_frame":0,"end_frame":4,"label":2})"),
      ParseError);
  EXPECT_THROW(segments_from(
                   R"({"clip_id":"a","person_id":"p","start_frame":0,"end_frame":4,"audio_score":-0.1})"),
               ParseError);
}

TEST(ParseSegments, ExtraFieldsIgnored) {
  auto segs = segments_from(
      R"({"clip_id":"a","person_id":"p","start_frame":0,"end_frame":4,"visual_score":0.9,"n_frames_covered":5})");
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].length(), 5);
}

TEST(ParseQualityAndLabels, RangeAndBinaryChecks) {
  std::istringstream good_q(R"({"clip_id":"a","person_id":"p","frame":0,"quality":1})");
  EXPECT_EQ(parse_quality_file(good_q)[0].entries[0].quality, 1.0);
  std::istringstream bad_q(R"({"clip_id":"a","person_id":"p","frame":0,"quality":1.5})");
  EXPECT_THROW(parse_quality_file(bad_q), ParseError);
  std::istringstream good_l(R"({"clip_id":"a","person_id":"p","frame":0,"label":1})");
  EXPECT_TRUE(parse_label_file(good_l)[0].entries[0].label);
  std::istringstream bad_l(R"({"clip_id":"a","person_id":"p","frame":0,"label":0.5})");
  EXPECT_THROW(parse_label_file(bad_l), ParseError);
}

TEST(LoadFiles, MissingFileIsIoError) {
  EXPECT_THROW(load_score_file("/nonexistent/scores.jsonl"), IoError);
}

// Property: parse(write(parse(x))) == parse(x), and line order is irrelevant.
TEST(RoundTrip, WriteThenParseIsLosslessAndOrderInsensitive) {
  synth::ScenarioConfig cfg;
  cfg.n_clips = 3;
  cfg.frames_per_clip = 120;
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    cfg.seed = seed;
    const auto ds = synth::generate_scenario(cfg).dataset;

    std::ostringstream s_out, g_out, q_out, l_out;
    write_score_file(s_out, ds.scores.at("visual"));
    write_segment_file(g_out, ds.segments);
    write_quality_file(q_out, ds.quality);
    write_label_file(l_out, ds.labels);

    auto shuffled = [&](const std::string& text) {
      std::vector<std::string> lines;
      std::istringstream in(text);
      for (std::string line; std::getline(in, line);) lines.push_back(line);
      std::shuffle(lines.begin(), lines.end(), rng);
      std::string out;
      for (const auto& l : lines) out += l + "\n";
      return out;
    };

    for (bool shuffle : {false, true}) {
      auto prep = [&](const std::string& t) { return shuffle ? shuffled(t) : t; };
      std::istringstream s_in(prep(s_out.str())), g_in(prep(g_out.str())),
          q_in(prep(q_out.str())), l_in(prep(l_out.str()));
      EXPECT_EQ(parse_score_file(s_in), ds.scores.at("visual"));
      EXPECT_EQ(parse_segment_file(g_in), ds.segments);
      EXPECT_EQ(parse_quality_file(q_in), ds.quality);
      EXPECT_EQ(parse_label_file(l_in), ds.labels);
    }
  }
}

TEST(RoundTrip, ExtremeValuesSurvive) {
  FrameScoreTrack t{key(), {{0, 0.0}, {1, 1.0}, {2, 1e-300}, {3, 0.1 + 0.2}, {4, 1.0 - 1e-16}}};
  std::ostringstream out;
  write_score_file(out, {t});
  std::istringstream in(out.str());
  EXPECT_EQ(parse_score_file(in), std::vector<FrameScoreTrack>{t});
}

TEST(Validate, GeneratedDatasetIsClean) {
  synth::ScenarioConfig cfg;
  cfg.n_clips = 2;
  cfg.frames_per_clip = 200;
  const auto report = validate_dataset(synth::generate_scenario(cfg).dataset);
  EXPECT_TRUE(report.issues.empty()) << report.to_json();
}

TEST(Validate, SegmentWithoutVisualTrackWarns) {
  Dataset ds;
  ds.scores["v"] = {testing::track({0.1, 0.2}, 0, key("c0", "p0"))};
  ds.segments = {testing::segment(0, 1, 0.5, true, key("c0", "p9"))};
  const auto report = validate_dataset(ds);
  EXPECT_TRUE(report.ok());
  ASSERT_EQ(report.warning_count(), 1u);
  EXPECT_NE(report.issues[0].message.find("no score track"), std::string::npos);
}

TEST(Validate, DuplicateTrackForSourceIsViolation) {
  Dataset ds;
  ds.scores["v"] = {testing::track({0.1}), testing::track({0.2})};
  const auto report = validate_dataset(ds);
  EXPECT_FALSE(report.ok());
  EXPECT_NE(report.issues[0].message.find("duplicate"), std::string::npos);
}

TEST(Validate, SameKeyInTwoSourcesIsFine) {
  Dataset ds;
  ds.scores["a"] = {testing::track({0.1})};
  ds.scores["b"] = {testing::track({0.2})};
  EXPECT_TRUE(validate_dataset(ds).issues.empty());
}

TEST(Validate, CatchesHandBuiltInvariantBreaks) {
  Dataset ds;
  FrameScoreTrack bad{key(), {{3, 0.5}, {2, 0.5}, {4, 1.5}}};
  ds.scores["v"] = {bad};
  ds.segments = {testing::segment(0, 10), testing::segment(10, 12), testing::segment(20, 15)};
  ds.quality = {QualityTrack{key("c0", "p0"), {{0, 0.5}}}};
  ds.labels = {FrameLabelTrack{TrackKey{"c\n0", "p"}, {}}};
  const auto report = validate_dataset(ds);
  EXPECT_FALSE(report.ok());
  auto has = [&](const std::string& needle) {
    return std::any_of(report.issues.begin(), report.issues.end(),
                       [&](const Issue& i) { return i.message.find(needle) != std::string::npos; });
  };
  EXPECT_TRUE(has("not strictly increasing"));
  EXPECT_TRUE(has("outside [0,1]"));
  EXPECT_TRUE(has("overlaps"));
  EXPECT_TRUE(has("start_frame > end_frame"));
  EXPECT_TRUE(has("invalid track key"));
  EXPECT_TRUE(has("lack quality entries"));
}

}  // namespace
}  // namespace egosocial
