#include "egosocial/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace egosocial {

namespace {

struct ApScan {
  double ap = 0.0;
  std::vector<std::pair<double, double>> curve;
};

// Expects ranked items with at least one positive.
ApScan scan_ranked(const std::vector<ScoredItem>& ranked, std::int64_t positives) {
  ApScan out;
  out.curve.reserve(static_cast<std::size_t>(positives));
  std::int64_t tp = 0;
  double sum = 0.0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (!ranked[k].label) continue;
    ++tp;
    const double precision = static_cast<double>(tp) / static_cast<double>(k + 1);
    sum += precision;
    out.curve.emplace_back(static_cast<double>(tp) / static_cast<double>(positives), precision);
  }
  out.ap = sum / static_cast<double>(positives);
  return out;
}

std::int64_t count_positives(const std::vector<ScoredItem>& items) {
  return std::count_if(items.begin(), items.end(), [](const ScoredItem& i) { return i.label; });
}

void check_scores(const std::vector<ScoredItem>& items) {
  for (const auto& i : items) {
    if (!(i.score >= 0.0 && i.score <= 1.0))
      throw std::invalid_argument("score outside [0,1] for " + i.tiebreak.clip_id + "/" +
                                  i.tiebreak.person_id + " frame " +
                                  std::to_string(i.tiebreak.frame));
  }
}

}  // namespace

void sort_ranked(std::vector<ScoredItem>& items) {
  std::sort(items.begin(), items.end(), [](const ScoredItem& a, const ScoredItem& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tiebreak < b.tiebreak;
  });
}

double average_precision(std::vector<ScoredItem> items) {
  check_scores(items);
  const auto positives = count_positives(items);
  if (positives == 0) throw UndefinedMetricError("average precision undefined: no positive items");
  sort_ranked(items);
  return scan_ranked(items, positives).ap;
}

double top1_accuracy(const std::vector<ScoredItem>& items, double threshold) {
  if (items.empty()) throw UndefinedMetricError("accuracy undefined: no items");
  std::size_t correct = 0;
  for (const auto& i : items)
    if ((i.score >= threshold) == i.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(items.size());
}

MissingPolicy parse_missing_policy(const std::string& name) {
  if (name == "error") return MissingPolicy::kError;
  if (name == "zero") return MissingPolicy::kZero;
  throw ConfigError("unknown missing-prediction policy '" + name + "' (expected error or zero)");
}

EvalReport build_report(std::vector<ScoredItem> items, const EvalOptions& options,
                        std::vector<std::string> warnings) {
  check_scores(items);
  EvalReport report;
  report.threshold = options.threshold;
  report.warnings = std::move(warnings);
  report.n_positive = count_positives(items);
  report.n_negative = static_cast<std::int64_t>(items.size()) - report.n_positive;
  if (items.empty()) {
    report.warnings.push_back("no items to evaluate; mAP and accuracy undefined");
    return report;
  }
  report.top1_accuracy = top1_accuracy(items, options.threshold);
  sort_ranked(items);

  if (report.n_positive == 0) {
    report.warnings.push_back("mAP undefined: no positive items");
    return report;
  }
  auto pooled = scan_ranked(items, report.n_positive);
  report.pr_curve = std::move(pooled.curve);

  if (!options.per_clip) {
    report.map = pooled.ap;
    return report;
  }

  // Ranked order is preserved within each clip group.
  std::map<std::string, std::vector<ScoredItem>> by_clip;
  for (auto& i : items) by_clip[i.tiebreak.clip_id].push_back(i);
  double sum = 0.0;
  std::size_t clips = 0;
  for (const auto& [clip, clip_items] : by_clip) {
    const auto p = count_positives(clip_items);
    if (p == 0) {
      report.warnings.push_back("clip " + clip + " has no positives; skipped in per-clip mAP");
      continue;
    }
    sum += scan_ranked(clip_items, p).ap;
    ++clips;
  }
  report.map = sum / static_cast<double>(clips);
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::ordered_json j;
  if (map)
    j["map"] = *map;
  else
    j["map"] = nullptr;
  j["top1_accuracy"] = top1_accuracy;
  j["n_positive"] = n_positive;
  j["n_negative"] = n_negative;
  j["threshold"] = threshold;
  auto curve = nlohmann::ordered_json::array();
  for (const auto& [r, p] : pr_curve) curve.push_back({r, p});
  j["pr_curve"] = std::move(curve);
  j["warnings"] = warnings;
  return j.dump() + "\n";
}

std::string EvalReport::to_table(const std::string& method) const {
  const std::size_t width = std::max<std::size_t>(method.size(), 6);
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-*s  %9s  %9s\n", static_cast<int>(width), "Method", "mAP",
                "Acc");
  out += buf;
  out += std::string(width + 22, '-') + "\n";
  std::string map_cell = "n/a";
  if (map) {
    std::snprintf(buf, sizeof buf, "%.2f%%", *map * 100.0);
    map_cell = buf;
  }
  std::snprintf(buf, sizeof buf, "%.2f%%", top1_accuracy * 100.0);
  const std::string acc_cell = buf;
  std::snprintf(buf, sizeof buf, "%-*s  %9s  %9s\n", static_cast<int>(width), method.c_str(),
                map_cell.c_str(), acc_cell.c_str());
  out += buf;
  return out;
}

EvalReport evaluate_lam(const std::vector<FrameScoreTrack>& predictions,
                        const std::vector<FrameLabelTrack>& labels, const EvalOptions& options) {
  std::vector<ScoredItem> items;
  std::vector<std::string> warnings;
  std::size_t matched = 0;
  std::size_t missing = 0;
  std::string first_missing;

  for (const auto& lt : labels) {
    const FrameScoreTrack* pt = find_track(predictions, lt.key);
    std::size_t p = 0;
    for (const auto& le : lt.entries) {
      std::optional<double> score;
      if (pt != nullptr) {
        const auto& pe = pt->entries;
        while (p < pe.size() && pe[p].frame < le.frame) ++p;
        if (p < pe.size() && pe[p].frame == le.frame) score = pe[p].score;
      }
      if (score) {
        ++matched;
      } else {
        if (missing++ == 0)
          first_missing = lt.key.str() + " frame " + std::to_string(le.frame);
        score = 0.0;
      }
      items.push_back({*score, le.label, {lt.key.clip_id, lt.key.person_id, le.frame}});
    }
  }

  if (matched == 0) throw Error("predictions and labels share no frames");
  if (missing > 0) {
    if (options.missing == MissingPolicy::kError)
      throw Error(std::to_string(missing) + " labeled frame(s) lack a prediction (first: " +
                  first_missing + ")");
    warnings.push_back(std::to_string(missing) +
                       " labeled frame(s) lacked a prediction and were scored 0 (first: " +
                       first_missing + ")");
  }
  return build_report(std::move(items), options, std::move(warnings));
}

std::vector<ScoredItem> collect_ttm_items(const std::vector<FrameScoreTrack>& fused,
                                          const std::vector<UtteranceSegment>& segments,
                                          std::vector<std::string>* warnings) {
  std::vector<ScoredItem> items;
  std::size_t excluded = 0;
  std::size_t partial = 0;
  for (const auto& seg : segments) {
    if (!seg.label) continue;
    const FrameScoreTrack* t = find_track(fused, seg.key);
    std::int64_t covered = 0;
    if (t != nullptr) {
      const auto& es = t->entries;
      auto it = std::lower_bound(es.begin(), es.end(), seg.start_frame,
                                 [](const ScoreEntry& e, Frame f) { return e.frame < f; });
      for (; it != es.end() && it->frame <= seg.end_frame; ++it, ++covered)
        items.push_back({it->score, *seg.label, {seg.key.clip_id, seg.key.person_id, it->frame}});
    }
    if (covered == 0) {
      ++excluded;
      if (warnings != nullptr)
        warnings->push_back("segment " + seg.key.str() + " [" + std::to_string(seg.start_frame) +
                            "," + std::to_string(seg.end_frame) +
                            "] has no predicted frames; excluded");
    } else if (covered < seg.length()) {
      ++partial;
    }
  }
  if (warnings != nullptr) {
    if (excluded > 0)
      warnings->push_back(std::to_string(excluded) + " labeled segment(s) excluded for lack of coverage");
    if (partial > 0)
      warnings->push_back(std::to_string(partial) +
                          " labeled segment(s) only partially covered; scored on covered frames");
  }
  return items;
}

EvalReport evaluate_ttm(const std::vector<FrameScoreTrack>& fused,
                        const std::vector<UtteranceSegment>& segments, const EvalOptions& options) {
  std::vector<std::string> warnings;
  auto items = collect_ttm_items(fused, segments, &warnings);
  return build_report(std::move(items), options, std::move(warnings));
}

}  // namespace egosocial
