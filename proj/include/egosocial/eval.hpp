#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "egosocial/types.hpp"

namespace egosocial {

// Deterministic ordering for items with equal scores.
struct TieKey {
  std::string clip_id;
  std::string person_id;
  Frame frame = 0;

  auto operator<=>(const TieKey&) const = default;
  bool operator==(const TieKey&) const = default;
};

struct ScoredItem {
  double score = 0.0;
  bool label = false;
  TieKey tiebreak;
};

// Ranking used by every metric: score descending, then tiebreak ascending.
void sort_ranked(std::vector<ScoredItem>& items);

// Non-interpolated average precision: (1/P) * sum of precision@k over the
// ranks k holding a positive. Throws UndefinedMetricError without positives
// and std::invalid_argument for scores outside [0,1].
double average_precision(std::vector<ScoredItem> items);

// Fraction of items where (score >= threshold) matches the label. Throws
// UndefinedMetricError for an empty collection.
double top1_accuracy(const std::vector<ScoredItem>& items, double threshold = 0.5);

struct EvalReport {
  std::optional<double> map;  // empty when undefined (no positives)
  double top1_accuracy = 0.0;
  std::int64_t n_positive = 0;
  std::int64_t n_negative = 0;
  double threshold = 0.5;
  // (recall, precision) at every rank holding a positive, in rank order.
  std::vector<std::pair<double, double>> pr_curve;
  std::vector<std::string> warnings;

  std::string to_json() const;
  // Plain-text row layout: Method | mAP | Acc, as percentages.
  std::string to_table(const std::string& method) const;
};

enum class MissingPolicy {
  kError,  // a labeled frame without prediction is an error
  kZero,   // score it 0 and record a warning
};

MissingPolicy parse_missing_policy(const std::string& name);

struct EvalOptions {
  double threshold = 0.5;
  bool per_clip = false;  // mean of per-clip APs instead of pooled AP
  MissingPolicy missing = MissingPolicy::kError;
};

// Builds an EvalReport from pooled items. An undefined AP leaves map empty
// and adds a warning instead of throwing.
EvalReport build_report(std::vector<ScoredItem> items, const EvalOptions& options,
                        std::vector<std::string> warnings = {});

// Frame-level looking-at-me evaluation: every labeled frame becomes one item.
// Throws Error when predictions and labels share no frame, or when a labeled
// frame lacks a prediction under MissingPolicy::kError.
EvalReport evaluate_lam(const std::vector<FrameScoreTrack>& predictions,
                        const std::vector<FrameLabelTrack>& labels,
                        const EvalOptions& options = {});

// Frame-level talking-to-me evaluation: each predicted frame inside a labeled
// segment becomes one item carrying the segment's label. Labeled segments
// with no predicted frame are excluded and reported as warnings.
EvalReport evaluate_ttm(const std::vector<FrameScoreTrack>& fused,
                        const std::vector<UtteranceSegment>& segments,
                        const EvalOptions& options = {});

// Items for evaluate_ttm, exposed for tests and tooling.
std::vector<ScoredItem> collect_ttm_items(const std::vector<FrameScoreTrack>& fused,
                                          const std::vector<UtteranceSegment>& segments,
                                          std::vector<std::string>* warnings = nullptr);

}  // namespace egosocial
