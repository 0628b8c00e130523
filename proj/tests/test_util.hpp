#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "egosocial/eval.hpp"
#include "egosocial/types.hpp"

namespace egosocial::testing {

inline TrackKey key(const std::string& clip = "c0", const std::string& person = "p0") {
  return {clip, person};
}

// Track with consecutive frames starting at first_frame.
inline FrameScoreTrack track(const std::vector<double>& scores, Frame first_frame = 0,
                             const TrackKey& k = key()) {
  FrameScoreTrack t{k, {}};
  for (std::size_t i = 0; i < scores.size(); ++i)
    t.entries.push_back({first_frame + static_cast<Frame>(i), scores[i]});
  return t;
}

inline std::vector<double> scores_of(const FrameScoreTrack& t) {
  std::vector<double> out;
  for (const auto& e : t.entries) out.push_back(e.score);
  return out;
}

inline UtteranceSegment segment(Frame start, Frame end, std::optional<double> audio = std::nullopt,
                                std::optional<bool> label = std::nullopt,
                                const TrackKey& k = key()) {
  return {k, start, end, audio, label};
}

// Items with distinct tiebreak keys (one frame per item).
inline std::vector<ScoredItem> items(const std::vector<double>& scores,
                                     const std::vector<int>& labels) {
  std::vector<ScoredItem> out;
  for (std::size_t i = 0; i < scores.size(); ++i)
    out.push_back({scores[i], labels[i] == 1, {"c0", "p0", static_cast<Frame>(i)}});
  return out;
}

// Random instance with heavy ties: scores drawn from a coarse grid and
// tiebreak keys spread over a few clips/persons. At least one positive.
inline std::vector<ScoredItem> random_items(std::mt19937_64& rng, std::size_t max_size) {
  std::uniform_int_distribution<std::size_t> size_dist(1, max_size);
  const std::size_t n = size_dist(rng);
  std::uniform_int_distribution<int> levels_dist(1, 40);
  const int levels = levels_dist(rng);
  std::uniform_int_distribution<int> level(0, levels);
  std::uniform_real_distribution<double> prevalence(0.05, 0.95);
  std::bernoulli_distribution positive(prevalence(rng));
  std::uniform_int_distribution<int> who(0, 2);
  std::vector<ScoredItem> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({static_cast<double>(level(rng)) / levels, positive(rng),
                   {"c" + std::to_string(who(rng)), "p" + std::to_string(who(rng)),
                    static_cast<Frame>(i)}});
  }
  if (std::none_of(out.begin(), out.end(), [](const ScoredItem& i) { return i.label; }))
    out[n / 2].label = true;
  return out;
}

inline FrameScoreTrack random_track(std::mt19937_64& rng, std::size_t length) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> gap(1, 3);
  std::bernoulli_distribution coarse(0.3);
  FrameScoreTrack t{key(), {}};
  Frame f = 0;
  for (std::size_t i = 0; i < length; ++i) {
    // Mix continuous and repeated values so ties show up in windows.
    const double s = coarse(rng) ? std::round(u(rng) * 4.0) / 4.0 : u(rng);
    t.entries.push_back({f, s});
    f += gap(rng);
  }
  return t;
}

}  // namespace egosocial::testing
