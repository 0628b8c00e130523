#pragma once

#include <set>
#include <span>
#include <vector>

#include "egosocial/types.hpp"

namespace egosocial {

// Centered median window, counted in track entries (not absolute frames).
class MedianConfig {
 public:
  static constexpr int kDefaultWindow = 5;

  MedianConfig() = default;
  // Throws ConfigError unless window is odd and >= 1.
  explicit MedianConfig(int window);

  int window() const { return window_; }
  int half() const { return window_ / 2; }

 private:
  int window_ = kDefaultWindow;
};

// Median over each entry's centered window, truncated at the track ends.
// Even-sized truncated windows take the mean of the two middle values.
// Frame indices are preserved.
FrameScoreTrack median_filter(const FrameScoreTrack& track, const MedianConfig& config);

// Utterance-level visual evidence: the maximum frame score inside a segment.
struct SegmentVisualScore {
  UtteranceSegment segment;
  double visual_score = 0.0;
  std::int64_t n_frames_covered = 0;  // 0 means no visual entry fell inside

  bool covered() const { return n_frames_covered > 0; }
};

// One SegmentVisualScore per segment, in input order. Segments with no visual
// entry in range score 0. Throws std::invalid_argument if any segment's key
// differs from the track's.
std::vector<SegmentVisualScore> max_score_filter(const FrameScoreTrack& visual,
                                                 std::span<const UtteranceSegment> segments);

// A segment paired with whatever score should be spread over its frames.
struct SegmentScore {
  UtteranceSegment segment;
  double score = 0.0;
};

std::vector<SegmentScore> as_segment_scores(std::span<const SegmentVisualScore> scores);

// Spreads each segment's score over its member frames. Every frame of
// frame_domain must fall inside some segment (std::invalid_argument naming the
// frame otherwise). All segments must share one key; the result carries it.
FrameScoreTrack broadcast_segment_scores(std::span<const SegmentScore> segment_scores,
                                         const std::set<Frame>& frame_domain);

// Broadcast over the union of all segment frame ranges.
FrameScoreTrack broadcast_segment_scores(std::span<const SegmentScore> segment_scores);

// Mean face quality over the entries inside the segment; 0 when none fall
// inside (no detected face).
double segment_mean_quality(const QualityTrack& quality, const UtteranceSegment& segment);

}  // namespace egosocial
