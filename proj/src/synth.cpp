#include "egosocial/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>
#include <sstream>

#include <json.hpp>

#include "egosocial/fusion.hpp"
#include "egosocial/io.hpp"
#include "egosocial/temporal.hpp"

namespace egosocial::synth {

namespace {

using C = ModelConstants;

// mt19937_64 output is fixed by the standard; the std:: distributions are not,
// so the transforms below are hand-rolled to stay platform-stable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Inclusive integer range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  // Standard normal via Box-Muller, one variate per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 engine_;
};

double clip01(double x) { return std::clamp(x, 0.0, 1.0); }

bool in_unit(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

std::string numbered(const char* prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%0*d", prefix, width, i);
  return buf;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n_clips < 1) throw ConfigError("n_clips must be positive");
  if (frames_per_clip < 1) throw ConfigError("frames_per_clip must be positive");
  if (persons_per_clip < 1) throw ConfigError("persons_per_clip must be positive");
  if (n_visual_sources < 1) throw ConfigError("n_visual_sources must be positive");
  if (!std::isfinite(utterance_rate) || utterance_rate < 0.0)
    throw ConfigError("utterance_rate must be finite and non-negative");
  if (!in_unit(positive_fraction)) throw ConfigError("positive_fraction must lie in [0,1]");
  if (!in_unit(gaze_aversion_prob)) throw ConfigError("gaze_aversion_prob must lie in [0,1]");
  if (!in_unit(audio_fp_rate)) throw ConfigError("audio_fp_rate must lie in [0,1]");
  if (!in_unit(quality_noise_coupling))
    throw ConfigError("quality_noise_coupling must lie in [0,1]");
  if (!std::isfinite(visual_noise_sigma) || visual_noise_sigma < 0.0)
    throw ConfigError("visual_noise_sigma must be finite and non-negative");
}

std::string visual_source_name(int index) {
  return index == 0 ? "visual" : "visual" + std::to_string(index);
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Scenario out;
  auto& ds = out.dataset;
  auto& gt = out.truth;
  std::vector<std::vector<FrameScoreTrack>> visual(static_cast<std::size_t>(cfg.n_visual_sources));

  const Frame frames = cfg.frames_per_clip;
  const double coupling = cfg.quality_noise_coupling;
  const double whole_rate = std::floor(cfg.utterance_rate);
  const double frac_rate = cfg.utterance_rate - whole_rate;

  for (int c = 0; c < cfg.n_clips; ++c) {
    for (int p = 0; p < cfg.persons_per_clip; ++p) {
      const TrackKey key{numbered("clip", c, 3), numbered("p", p, 1)};

      // Utterances: one per equal-width slot, so they are disjoint by construction.
      auto n_utt = static_cast<Frame>(whole_rate) + (rng.uniform() < frac_rate ? 1 : 0);
      n_utt = std::min(n_utt, frames);
      struct Utt {
        UtteranceSegment seg;
        bool blurred;
        double blur_shift;
      };
      std::vector<Utt> utts;
      if (n_utt > 0) {
        const Frame slot = frames / n_utt;
        const Frame min_len = std::max<Frame>(1, static_cast<Frame>(0.4 * static_cast<double>(slot)));
        const Frame max_len = std::max<Frame>(min_len, static_cast<Frame>(0.8 * static_cast<double>(slot)));
        for (Frame s = 0; s < n_utt; ++s) {
          const Frame len = rng.uniform_int(min_len, max_len);
          const Frame start = s * slot + rng.uniform_int(0, slot - len);
          Utt u{{key, start, start + len - 1, std::nullopt, std::nullopt}, false, 0.0};
          const bool positive = rng.uniform() < cfg.positive_fraction;
          u.blurred = rng.uniform() < C::kBlurRate;
          const double shift = rng.normal() * C::kBlurShiftScale * cfg.visual_noise_sigma;
          u.blur_shift = u.blurred ? shift : 0.0;
          const bool audio_fp = rng.uniform() < cfg.audio_fp_rate;
          const double audio_mean = positive ? C::kAudioPositive
                                    : audio_fp ? C::kAudioFalsePositive
                                               : C::kAudioNegative;
          u.seg.audio_score = clip01(audio_mean + C::kAudioSigma * rng.normal());
          u.seg.label = positive;
          utts.push_back(std::move(u));
        }
      }

      std::vector<FrameScoreTrack*> tracks;
      for (auto& v : visual) tracks.push_back(&v.emplace_back(FrameScoreTrack{key, {}}));
      QualityTrack quality{key, {}};
      FrameLabelTrack gaze{key, {}};
      std::size_t u = 0;
      for (Frame f = 0; f < frames; ++f) {
        while (u < utts.size() && utts[u].seg.end_frame < f) ++u;
        const Utt* cur = (u < utts.size() && utts[u].seg.contains(f)) ? &utts[u] : nullptr;

        // Fixed number of draws per frame keeps streams aligned across configs.
        const double u_gaze = rng.uniform();
        const double u_qual_a = rng.uniform();
        const double u_qual_b = rng.uniform();

        const bool looking = cur != nullptr && *cur->seg.label && u_gaze >= cfg.gaze_aversion_prob;
        const bool blurred = cur != nullptr && cur->blurred;
        const double base = (looking ? C::kGazeScore : C::kAwayScore) +
                            (cur != nullptr ? cur->blur_shift : 0.0);
        for (auto* t : tracks)
          t->entries.push_back({f, clip01(base + cfg.visual_noise_sigma * rng.normal())});

        const double informative = blurred ? 0.3 * u_qual_a : 0.7 + 0.3 * u_qual_a;
        quality.entries.push_back({f, clip01(coupling * informative + (1.0 - coupling) * u_qual_b)});
        gaze.entries.push_back({f, looking});
      }

      ds.quality.push_back(std::move(quality));
      ds.labels.push_back(gaze);
      gt.gaze.push_back(std::move(gaze));
      for (auto& ut : utts) {
        ds.segments.push_back(ut.seg);
        gt.ttm_segments.push_back(ut.seg);
        gt.blurred.push_back(ut.blurred);
      }
    }
  }

  for (int k = 0; k < cfg.n_visual_sources; ++k)
    ds.scores[visual_source_name(k)] = std::move(visual[static_cast<std::size_t>(k)]);
  gt.lam_labels = ds.labels;
  return out;
}

std::string config_to_json(const ScenarioConfig& cfg) {
  nlohmann::ordered_json j;
  j["n_clips"] = cfg.n_clips;
  j["frames_per_clip"] = cfg.frames_per_clip;
  j["persons_per_clip"] = cfg.persons_per_clip;
  j["utterance_rate"] = cfg.utterance_rate;
  j["positive_fraction"] = cfg.positive_fraction;
  j["gaze_aversion_prob"] = cfg.gaze_aversion_prob;
  j["audio_fp_rate"] = cfg.audio_fp_rate;
  j["visual_noise_sigma"] = cfg.visual_noise_sigma;
  j["quality_noise_coupling"] = cfg.quality_noise_coupling;
  j["seed"] = cfg.seed;
  j["n_visual_sources"] = cfg.n_visual_sources;
  return j.dump(2);
}

ScenarioConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid scenario config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  ScenarioConfig cfg;
  try {
    for (const auto& [name, value] : j.items()) {
      if (name == "n_clips") cfg.n_clips = value.get<int>();
      else if (name == "frames_per_clip") cfg.frames_per_clip = value.get<int>();
      else if (name == "persons_per_clip") cfg.persons_per_clip = value.get<int>();
      else if (name == "utterance_rate") cfg.utterance_rate = value.get<double>();
      else if (name == "positive_fraction") cfg.positive_fraction = value.get<double>();
      else if (name == "gaze_aversion_prob") cfg.gaze_aversion_prob = value.get<double>();
      else if (name == "audio_fp_rate") cfg.audio_fp_rate = value.get<double>();
      else if (name == "visual_noise_sigma") cfg.visual_noise_sigma = value.get<double>();
      else if (name == "quality_noise_coupling") cfg.quality_noise_coupling = value.get<double>();
      else if (name == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (name == "n_visual_sources") cfg.n_visual_sources = value.get<int>();
      else throw ConfigError("unknown scenario config field '" + name + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad scenario config value: ") + e.what());
  }
  return cfg;
}

void write_scenario(const std::filesystem::path& dir, const Scenario& scenario,
                    const ScenarioConfig& config) {
  const auto& ds = scenario.dataset;
  nlohmann::ordered_json files;
  nlohmann::ordered_json counts;
  auto emit = [&](const std::string& role, const std::string& name, auto&& writer,
                  std::size_t records) {
    std::ostringstream os;
    writer(os);
    write_text_file(dir / name, os.str());
    files[role] = name;
    counts[role] = records;
  };
  auto count_entries = [](const auto& tracks) {
    std::size_t n = 0;
    for (const auto& t : tracks) n += t.entries.size();
    return n;
  };

  for (const auto& [source, tracks] : ds.scores) {
    emit("scores:" + source, "scores_" + source + ".jsonl",
         [&](std::ostream& os) { write_score_file(os, tracks); }, count_entries(tracks));
  }
  emit("segments", "segments.jsonl", [&](std::ostream& os) { write_segment_file(os, ds.segments); },
       ds.segments.size());
  emit("quality", "quality.jsonl", [&](std::ostream& os) { write_quality_file(os, ds.quality); },
       count_entries(ds.quality));
  emit("labels", "labels.jsonl", [&](std::ostream& os) { write_label_file(os, ds.labels); },
       count_entries(ds.labels));

  std::size_t positives = 0;
  for (const auto& s : scenario.truth.ttm_segments) positives += (s.label && *s.label) ? 1 : 0;
  std::size_t blurred = static_cast<std::size_t>(
      std::count(scenario.truth.blurred.begin(), scenario.truth.blurred.end(), true));

  nlohmann::ordered_json manifest;
  manifest["generator"] = "egosocial-synth";
  manifest["config"] = nlohmann::ordered_json::parse(config_to_json(config));
  manifest["seed"] = config.seed;
  manifest["files"] = files;
  manifest["record_counts"] = counts;
  manifest["truth"] = {{"positive_segments", positives},
                       {"negative_segments", scenario.truth.ttm_segments.size() - positives},
                       {"blurred_segments", blurred}};
  manifest["constants"] = {{"gaze_score", C::kGazeScore},
                           {"away_score", C::kAwayScore},
                           {"blur_rate", C::kBlurRate},
                           {"blur_shift_scale", C::kBlurShiftScale},
                           {"audio_positive", C::kAudioPositive},
                           {"audio_false_positive", C::kAudioFalsePositive},
                           {"audio_negative", C::kAudioNegative},
                           {"audio_sigma", C::kAudioSigma}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

TtmComparison compare_ttm_methods(const Scenario& scenario) {
  const Dataset& ds = scenario.dataset;
  const auto& visual = ds.scores.at(visual_source_name(0));
  const auto& segs = scenario.truth.ttm_segments;
  auto map_of = [&](const std::vector<FrameScoreTrack>& tracks) {
    return evaluate_ttm(tracks, segs).map.value_or(0.0);
  };

  std::vector<FrameScoreTrack> audio;
  for (const auto& [key, group] : group_segments(segs)) {
    std::vector<SegmentScore> s;
    for (const auto& seg : group) s.push_back({seg, seg.audio_score.value_or(0.0)});
    audio.push_back(broadcast_segment_scores(s));
  }

  TtmComparison out;
  out.raw_visual = map_of(visual);
  out.filtered_visual = map_of(max_filter_tracks(visual, segs));
  out.audio = map_of(audio);
  const FuseOptions avg{FusionMethod::kAverage, MedianConfig(), MedianStage::kFused};
  const FuseOptions qw{FusionMethod::kQualityWeighted, MedianConfig(), MedianStage::kFused};
  out.average = map_of(fuse_ttm(ds, visual_source_name(0), avg).tracks);
  out.quality_weighted = map_of(fuse_ttm(ds, visual_source_name(0), qw).tracks);
  return out;
}

double oracle_ap(const std::vector<ScoredItem>& items) {
  // Rank by index so that no item data is moved around.
  std::vector<std::size_t> order(items.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = items[a];
    const auto& y = items[b];
    if (x.score > y.score) return true;
    if (x.score < y.score) return false;
    return std::tie(x.tiebreak.clip_id, x.tiebreak.person_id, x.tiebreak.frame) <
           std::tie(y.tiebreak.clip_id, y.tiebreak.person_id, y.tiebreak.frame);
  });

  std::size_t total_positive = 0;
  for (const auto& i : items) total_positive += i.label ? 1 : 0;
  if (total_positive == 0) throw UndefinedMetricError("oracle AP undefined: no positive items");

  double sum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (!items[order[k]].label) continue;
    std::size_t hits = 0;
    for (std::size_t j = 0; j <= k; ++j) hits += items[order[j]].label ? 1 : 0;
    sum += static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  return sum / static_cast<double>(total_positive);
}

FrameScoreTrack oracle_median(const FrameScoreTrack& track, int window) {
  if (window < 1 || window % 2 == 0)
    throw ConfigError("oracle median window must be odd and positive");
  const auto n = static_cast<long>(track.entries.size());
  const long half = window / 2;
  FrameScoreTrack out = track;
  for (long i = 0; i < n; ++i) {
    std::vector<double> values;
    for (long j = i - half; j <= i + half; ++j)
      if (j >= 0 && j < n) values.push_back(track.entries[static_cast<std::size_t>(j)].score);
    std::sort(values.begin(), values.end());
    const std::size_t m = values.size();
    out.entries[static_cast<std::size_t>(i)].score =
        m % 2 == 1 ? values[m / 2] : (values[m / 2 - 1] + values[m / 2]) / 2.0;
  }
  return out;
}

}  // namespace egosocial::synth
