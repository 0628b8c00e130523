#include "egosocial/temporal.hpp"

#include <algorithm>
#include <stdexcept>

namespace egosocial {

MedianConfig::MedianConfig(int window) : window_(window) {
  if (window < 1 || window % 2 == 0)
    throw ConfigError("median window must be an odd positive integer, got " +
                      std::to_string(window));
}

FrameScoreTrack median_filter(const FrameScoreTrack& track, const MedianConfig& config) {
  FrameScoreTrack out{track.key, track.entries};
  const auto n = static_cast<std::ptrdiff_t>(track.entries.size());
  const std::ptrdiff_t half = config.half();
  if (half == 0 || n < 2) return out;

  std::vector<double> window;
  window.reserve(static_cast<std::size_t>(config.window()));
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto lo = std::max<std::ptrdiff_t>(0, i - half);
    const auto hi = std::min<std::ptrdiff_t>(n - 1, i + half);
    window.clear();
    for (auto j = lo; j <= hi; ++j) window.push_back(track.entries[j].score);

    const auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
    std::nth_element(window.begin(), mid, window.end());
    double median = *mid;
    if (window.size() % 2 == 0) {
      // Lower middle is the largest element left of the partition point.
      const double lower = *std::max_element(window.begin(), mid);
      median = (lower + median) / 2.0;
    }
    out.entries[i].score = median;
  }
  return out;
}

std::vector<SegmentVisualScore> max_score_filter(const FrameScoreTrack& visual,
                                                 std::span<const UtteranceSegment> segments) {
  std::vector<SegmentVisualScore> out;
  out.reserve(segments.size());
  const auto& es = visual.entries;
  for (const auto& seg : segments) {
    if (seg.key != visual.key)
      throw std::invalid_argument("segment key " + seg.key.str() +
                                  " does not match visual track " + visual.key.str());
    auto lo = std::lower_bound(es.begin(), es.end(), seg.start_frame,
                               [](const ScoreEntry& e, Frame f) { return e.frame < f; });
    SegmentVisualScore s{seg, 0.0, 0};
    for (auto it = lo; it != es.end() && it->frame <= seg.end_frame; ++it) {
      s.visual_score = s.n_frames_covered == 0 ? it->score : std::max(s.visual_score, it->score);
      ++s.n_frames_covered;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<SegmentScore> as_segment_scores(std::span<const SegmentVisualScore> scores) {
  std::vector<SegmentScore> out;
  out.reserve(scores.size());
  for (const auto& s : scores) out.push_back({s.segment, s.visual_score});
  return out;
}

namespace {

const TrackKey& common_key(std::span<const SegmentScore> segment_scores) {
  if (segment_scores.empty())
    throw std::invalid_argument("broadcast needs at least one segment");
  const TrackKey& key = segment_scores.front().segment.key;
  for (const auto& s : segment_scores) {
    if (s.segment.key != key)
      throw std::invalid_argument("broadcast segments span several keys: " + key.str() +
                                  " and " + s.segment.key.str());
  }
  return key;
}

}  // namespace

FrameScoreTrack broadcast_segment_scores(std::span<const SegmentScore> segment_scores,
                                         const std::set<Frame>& frame_domain) {
  FrameScoreTrack out{common_key(segment_scores), {}};
  std::vector<const SegmentScore*> order;
  order.reserve(segment_scores.size());
  for (const auto& s : segment_scores) order.push_back(&s);
  std::sort(order.begin(), order.end(), [](const SegmentScore* a, const SegmentScore* b) {
    return a->segment.start_frame < b->segment.start_frame;
  });

  out.entries.reserve(frame_domain.size());
  auto seg = order.begin();
  for (Frame f : frame_domain) {
    while (seg != order.end() && (*seg)->segment.end_frame < f) ++seg;
    if (seg == order.end() || !(*seg)->segment.contains(f))
      throw std::invalid_argument("frame " + std::to_string(f) + " of " + out.key.str() +
                                  " is not covered by any segment");
    out.entries.push_back({f, (*seg)->score});
  }
  return out;
}

FrameScoreTrack broadcast_segment_scores(std::span<const SegmentScore> segment_scores) {
  std::set<Frame> domain;
  for (const auto& s : segment_scores)
    for (Frame f = s.segment.start_frame; f <= s.segment.end_frame; ++f) domain.insert(f);
  return broadcast_segment_scores(segment_scores, domain);
}

double segment_mean_quality(const QualityTrack& quality, const UtteranceSegment& segment) {
  if (quality.key != segment.key)
    throw std::invalid_argument("quality key " + quality.key.str() +
                                " does not match segment " + segment.key.str());
  const auto& es = quality.entries;
  auto lo = std::lower_bound(es.begin(), es.end(), segment.start_frame,
                             [](const QualityEntry& e, Frame f) { return e.frame < f; });
  double sum = 0.0;
  std::size_t count = 0;
  for (auto it = lo; it != es.end() && it->frame <= segment.end_frame; ++it) {
    sum += it->quality;
    ++count;
  }
  return count == 0 ? 0.0 : std::clamp(sum / static_cast<double>(count), 0.0, 1.0);
}

}  // namespace egosocial
