#include "egosocial/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <set>
#include <stdexcept>

namespace egosocial {

FusionMethod parse_fusion_method(const std::string& name) {
  if (name == "average") return FusionMethod::kAverage;
  if (name == "quality_weighted") return FusionMethod::kQualityWeighted;
  throw ConfigError("unknown fusion method '" + name + "' (expected average or quality_weighted)");
}

std::string to_string(FusionMethod method) {
  return method == FusionMethod::kAverage ? "average" : "quality_weighted";
}

MedianStage parse_median_stage(const std::string& name) {
  if (name == "fused") return MedianStage::kFused;
  if (name == "visual") return MedianStage::kVisual;
  if (name == "none") return MedianStage::kNone;
  throw ConfigError("unknown median stage '" + name + "' (expected fused, visual or none)");
}

std::string to_string(MedianStage stage) {
  switch (stage) {
    case MedianStage::kFused: return "fused";
    case MedianStage::kVisual: return "visual";
    case MedianStage::kNone: return "none";
  }
  return "fused";
}

AlignMode parse_align_mode(const std::string& name) {
  if (name == "strict") return AlignMode::kStrict;
  if (name == "intersect") return AlignMode::kIntersect;
  throw ConfigError("unknown alignment mode '" + name + "' (expected strict or intersect)");
}

namespace {

void require_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(what) + " = " + std::to_string(v) +
                                " outside [0,1]");
}

}  // namespace

double fuse_segment(double visual_score, double audio_score, double mean_quality,
                    FusionMethod method) {
  require_unit(visual_score, "visual_score");
  require_unit(audio_score, "audio_score");
  require_unit(mean_quality, "mean_quality");
  const double lo = std::min(visual_score, audio_score);
  const double hi = std::max(visual_score, audio_score);
  double fused = 0.0;
  switch (method) {
    case FusionMethod::kAverage:
      fused = (visual_score + audio_score) / 2.0;
      break;
    case FusionMethod::kQualityWeighted:
      fused = mean_quality * visual_score + (1.0 - mean_quality) * audio_score;
      break;
  }
  // Rounding can push a convex combination one ulp outside its endpoints.
  return std::clamp(fused, lo, hi);
}

std::vector<FrameScoreTrack> max_filter_tracks(const std::vector<FrameScoreTrack>& visual,
                                               const std::vector<UtteranceSegment>& segments,
                                               std::vector<std::string>* warnings) {
  std::vector<FrameScoreTrack> out;
  for (const auto& [key, segs] : group_segments(segments)) {
    const FrameScoreTrack* track = find_track(visual, key);
    const FrameScoreTrack empty{key, {}};
    if (track == nullptr && warnings != nullptr)
      warnings->push_back("no visual track for " + key.str() + "; its segments score 0");
    auto scores = max_score_filter(track != nullptr ? *track : empty, segs);
    out.push_back(broadcast_segment_scores(as_segment_scores(scores)));
  }
  return out;
}

FuseResult fuse_ttm(const Dataset& dataset, const std::string& visual_source,
                    const FuseOptions& options) {
  auto source = dataset.scores.find(visual_source);
  if (source == dataset.scores.end())
    throw ConfigError("unknown visual source '" + visual_source + "'");
  if (options.method == FusionMethod::kQualityWeighted && dataset.quality.empty())
    throw ConfigError("quality-weighted fusion requires quality tracks");

  const auto& visual_tracks = source->second;
  const auto groups = group_segments(dataset.segments);
  FuseResult result;

  for (const auto& t : visual_tracks) {
    if (!groups.contains(t.key))
      result.warnings.push_back("no segments for " + t.key.str() + "; track not fused");
  }

  for (const auto& [key, segs] : groups) {
    FrameScoreTrack visual{key, {}};
    if (const auto* t = find_track(visual_tracks, key)) {
      visual = options.median_stage == MedianStage::kVisual ? median_filter(*t, options.median)
                                                            : *t;
    } else {
      result.warnings.push_back("no visual track for " + key.str() + " in source '" +
                                visual_source + "'");
    }

    const QualityTrack* quality = find_track(dataset.quality, key);
    if (quality == nullptr && options.method == FusionMethod::kQualityWeighted)
      result.warnings.push_back("no quality track for " + key.str() + "; using quality 0");

    std::vector<SegmentScore> fused;
    fused.reserve(segs.size());
    for (const auto& vs : max_score_filter(visual, segs)) {
      const auto& seg = vs.segment;
      if (!vs.covered()) ++result.segments_without_visual;
      double score = vs.visual_score;
      if (seg.audio_score) {
        const double q = quality != nullptr ? segment_mean_quality(*quality, seg) : 0.0;
        score = fuse_segment(vs.visual_score, *seg.audio_score, q, options.method);
      } else {
        ++result.segments_without_audio;
      }
      fused.push_back({seg, score});
    }

    auto track = broadcast_segment_scores(fused);
    if (options.median_stage == MedianStage::kFused) track = median_filter(track, options.median);
    result.tracks.push_back(std::move(track));
  }

  if (result.segments_without_audio > 0)
    result.warnings.push_back(std::to_string(result.segments_without_audio) +
                              " segment(s) without audio_score used the visual score only");
  if (result.segments_without_visual > 0)
    result.warnings.push_back(std::to_string(result.segments_without_visual) +
                              " segment(s) had no visual frames and scored visual 0");
  return result;
}

std::vector<double> EnsembleSpec::normalized_weights() const {
  if (sources.empty()) throw ConfigError("ensemble needs at least one source");
  std::vector<double> w = weights.empty() ? std::vector<double>(sources.size(), 1.0) : weights;
  if (w.size() != sources.size())
    throw ConfigError("ensemble has " + std::to_string(sources.size()) + " sources but " +
                      std::to_string(w.size()) + " weights");
  for (double x : w) {
    if (!std::isfinite(x) || x < 0.0)
      throw ConfigError("ensemble weights must be finite and non-negative");
  }
  // Summing in sorted order makes the total independent of member order.
  std::vector<double> sorted = w;
  std::sort(sorted.begin(), sorted.end());
  double total = 0.0;
  for (double x : sorted) total += x;
  if (!(total > 0.0)) throw ConfigError("ensemble weights must have a positive sum");
  for (double& x : w) x /= total;
  return w;
}

EnsembleResult ensemble_tracks(const std::vector<FrameScoreTrack>& tracks,
                               const EnsembleSpec& spec, AlignMode align) {
  const auto weights = spec.normalized_weights();
  if (tracks.size() != weights.size())
    throw std::invalid_argument("ensemble got " + std::to_string(tracks.size()) +
                                " tracks for " + std::to_string(weights.size()) + " sources");
  const TrackKey& key = tracks.front().key;
  for (const auto& t : tracks) {
    if (t.key != key)
      throw std::invalid_argument("ensemble members disagree on key: " + key.str() + " vs " +
                                  t.key.str());
  }

  // Frames shared by every member.
  std::vector<Frame> shared;
  for (const auto& e : tracks.front().entries) shared.push_back(e.frame);
  for (std::size_t m = 1; m < tracks.size(); ++m) {
    std::vector<Frame> frames;
    for (const auto& e : tracks[m].entries) frames.push_back(e.frame);
    if (align == AlignMode::kStrict && frames != shared)
      throw std::invalid_argument("ensemble members for " + key.str() +
                                  " cover different frames (strict alignment)");
    std::vector<Frame> both;
    std::set_intersection(shared.begin(), shared.end(), frames.begin(), frames.end(),
                          std::back_inserter(both));
    shared = std::move(both);
  }
  std::set<Frame> all;
  for (const auto& t : tracks)
    for (const auto& e : t.entries) all.insert(e.frame);

  EnsembleResult result{{key, {}}, all.size() - shared.size()};
  result.track.entries.reserve(shared.size());
  std::vector<std::size_t> cursor(tracks.size(), 0);
  std::vector<std::pair<double, double>> members(tracks.size());  // (weight, score)
  for (Frame f : shared) {
    double lo = 1.0, hi = 0.0;
    for (std::size_t m = 0; m < tracks.size(); ++m) {
      const auto& es = tracks[m].entries;
      while (es[cursor[m]].frame < f) ++cursor[m];
      const double s = es[cursor[m]].score;
      members[m] = {weights[m], s};
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    std::sort(members.begin(), members.end());
    double acc = 0.0;
    for (const auto& [w, s] : members) acc += w * s;
    result.track.entries.push_back({f, std::clamp(acc, lo, hi)});
  }
  return result;
}

EnsembleDatasetResult ensemble_sources(const Dataset& dataset, const EnsembleSpec& spec,
                                       AlignMode align) {
  spec.normalized_weights();
  std::vector<const std::vector<FrameScoreTrack>*> members;
  for (const auto& name : spec.sources) {
    auto it = dataset.scores.find(name);
    if (it == dataset.scores.end()) throw ConfigError("unknown ensemble source '" + name + "'");
    members.push_back(&it->second);
  }

  std::set<TrackKey> keys;
  for (const auto* m : members)
    for (const auto& t : *m) keys.insert(t.key);

  EnsembleDatasetResult result;
  for (const auto& key : keys) {
    std::vector<FrameScoreTrack> tracks;
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (const auto* t = find_track(*members[i], key))
        tracks.push_back(*t);
      else
        missing.push_back(spec.sources[i]);
    }
    if (!missing.empty()) {
      std::string names;
      for (const auto& n : missing) names += (names.empty() ? "" : ",") + n;
      if (align == AlignMode::kStrict)
        throw std::invalid_argument("track " + key.str() + " missing from source(s) " + names +
                                    " (strict alignment)");
      result.warnings.push_back("dropped " + key.str() + ": missing from source(s) " + names);
      continue;
    }
    auto r = ensemble_tracks(tracks, spec, align);
    if (r.dropped_frames > 0)
      result.warnings.push_back("dropped " + std::to_string(r.dropped_frames) +
                                " unshared frame(s) of " + key.str());
    if (!r.track.entries.empty()) result.tracks.push_back(std::move(r.track));
  }
  return result;
}

}  // namespace egosocial
