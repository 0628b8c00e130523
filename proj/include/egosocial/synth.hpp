#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "egosocial/eval.hpp"
#include "egosocial/types.hpp"

namespace egosocial::synth {

// Knobs of the synthetic scenario. Every probability lies in [0,1].
struct ScenarioConfig {
  int n_clips = 20;
  int frames_per_clip = 900;
  int persons_per_clip = 2;
  double utterance_rate = 6.0;        // mean utterances per person per clip
  double positive_fraction = 0.5;     // share of utterances addressed to the wearer
  double gaze_aversion_prob = 0.3;    // per-frame look-away inside positive utterances
  double audio_fp_rate = 0.2;         // share of negative utterances with high audio
  double visual_noise_sigma = 0.1;
  double quality_noise_coupling = 0.5;  // how strongly low quality marks blurred faces
  std::uint64_t seed = 0;
  int n_visual_sources = 1;           // independent visual models sharing one latent state

  // Throws ConfigError on an invalid field.
  void validate() const;
};

// Constants of the generative model that are not exposed as knobs.
struct ModelConstants {
  static constexpr double kGazeScore = 0.85;
  static constexpr double kAwayScore = 0.15;
  static constexpr double kBlurRate = 0.3;         // share of utterances with a blurred face
  static constexpr double kBlurShiftScale = 6.0;   // blur offset sd, in units of visual sigma
  static constexpr double kAudioPositive = 0.8;
  static constexpr double kAudioFalsePositive = 0.75;
  static constexpr double kAudioNegative = 0.2;
  static constexpr double kAudioSigma = 0.1;
};

struct GroundTruth {
  std::vector<FrameLabelTrack> lam_labels;
  std::vector<UtteranceSegment> ttm_segments;  // with labels
  // Latent gaze state per frame; true means looking at the wearer.
  std::vector<FrameLabelTrack> gaze;
  // Parallel to ttm_segments: whether the face was blurred for that utterance.
  std::vector<bool> blurred;
};

struct Scenario {
  Dataset dataset;
  GroundTruth truth;
};

std::string visual_source_name(int index);

// Pure function of the config (seed included). Single-threaded; all random
// draws happen in (clip, person, frame) order from one mt19937_64 stream.
Scenario generate_scenario(const ScenarioConfig& config);

// Writes scores_<source>.jsonl, segments.jsonl, quality.jsonl, labels.jsonl
// and manifest.json (full config, seed, file list, record counts) into dir.
void write_scenario(const std::filesystem::path& dir, const Scenario& scenario,
                    const ScenarioConfig& config);

std::string config_to_json(const ScenarioConfig& config);
ScenarioConfig config_from_json(const std::string& text);

// TTM mAP of each scoring method on one scenario, all judged by evaluate_ttm
// against the same labeled segments. Visual methods use source "visual".
struct TtmComparison {
  double raw_visual = 0.0;       // per-frame visual scores as they are
  double filtered_visual = 0.0;  // per-segment max of visual, broadcast
  double audio = 0.0;            // segment audio score, broadcast
  double average = 0.0;          // average fusion
  double quality_weighted = 0.0;
};

TtmComparison compare_ttm_methods(const Scenario& scenario);

// Brute-force reference metrics, deliberately written without sharing code
// with the production implementations they check.

// Average precision by explicit enumeration: for every rank k, the prefix
// precision is recounted from scratch. O(n^2). Throws UndefinedMetricError
// without positives.
double oracle_ap(const std::vector<ScoredItem>& items);

// Median filter by materializing and fully sorting every truncated window.
// Throws ConfigError for an even or non-positive window.
FrameScoreTrack oracle_median(const FrameScoreTrack& track, int window);

}  // namespace egosocial::synth
