#pragma once

#include <optional>
#include <string>
#include <vector>

#include "egosocial/temporal.hpp"
#include "egosocial/types.hpp"

namespace egosocial {

enum class FusionMethod {
  kAverage,          // (visual + audio) / 2
  kQualityWeighted,  // q * visual + (1 - q) * audio
};

FusionMethod parse_fusion_method(const std::string& name);
std::string to_string(FusionMethod method);

// Late fusion of one utterance's visual and audio scores. All inputs must lie
// in [0,1] (std::invalid_argument otherwise). The result always lies between
// the two modality scores.
double fuse_segment(double visual_score, double audio_score, double mean_quality,
                    FusionMethod method);

// Where median smoothing runs inside fuse_ttm.
enum class MedianStage {
  kFused,   // on the broadcast fused track (default)
  kVisual,  // on the frame-level visual track, before the max-score filter
  kNone,
};

MedianStage parse_median_stage(const std::string& name);
std::string to_string(MedianStage stage);

struct FuseOptions {
  FusionMethod method = FusionMethod::kQualityWeighted;
  MedianConfig median;
  MedianStage median_stage = MedianStage::kFused;
};

struct FuseResult {
  std::vector<FrameScoreTrack> tracks;  // sorted by key
  std::vector<std::string> warnings;
  std::size_t segments_without_audio = 0;
  std::size_t segments_without_visual = 0;
};

// Talking-to-me fusion over a whole dataset. For every key with segments:
// max-score filter the visual track from `visual_source`, average face
// quality over each segment, fuse with the segment audio score, spread the
// fused score over the segment frames, then median-smooth (per options).
// Segments without audio fall back to the visual score. Throws ConfigError if
// the source is unknown, or if quality weighting is requested and the dataset
// carries no quality tracks at all.
FuseResult fuse_ttm(const Dataset& dataset, const std::string& visual_source,
                    const FuseOptions& options);

// Visual-only utterance scores: max-score filter broadcast over each key's
// segment frames, without audio or smoothing.
std::vector<FrameScoreTrack> max_filter_tracks(const std::vector<FrameScoreTrack>& visual,
                                               const std::vector<UtteranceSegment>& segments,
                                               std::vector<std::string>* warnings = nullptr);

enum class AlignMode {
  kStrict,     // member tracks must share the same frames
  kIntersect,  // keep only frames present in every member
};

AlignMode parse_align_mode(const std::string& name);

struct EnsembleSpec {
  std::vector<std::string> sources;
  std::vector<double> weights;  // empty means equal weights

  // Weights normalized to sum 1; throws ConfigError on an invalid spec.
  std::vector<double> normalized_weights() const;
};

struct EnsembleResult {
  FrameScoreTrack track;
  std::size_t dropped_frames = 0;
};

// Per-frame weighted mean of member tracks (tracks[i] pairs with the i-th
// weight). Members must share one key. The result does not depend on the
// order of (track, weight) pairs.
EnsembleResult ensemble_tracks(const std::vector<FrameScoreTrack>& tracks,
                               const EnsembleSpec& spec, AlignMode align = AlignMode::kStrict);

struct EnsembleDatasetResult {
  std::vector<FrameScoreTrack> tracks;
  std::vector<std::string> warnings;
};

// Ensembles the named sources of a dataset key by key. Keys missing from a
// member are an error in strict mode and are dropped (with a warning) in
// intersect mode.
EnsembleDatasetResult ensemble_sources(const Dataset& dataset, const EnsembleSpec& spec,
                                       AlignMode align = AlignMode::kStrict);

}  // namespace egosocial
