#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "egosocial/eval.hpp"
#include "egosocial/fusion.hpp"
#include "egosocial/io.hpp"
#include "egosocial/pipeline.hpp"
#include "egosocial/synth.hpp"
#include "egosocial/temporal.hpp"

namespace py = pybind11;
using namespace egosocial;

namespace {

// Python lists carry no clip/person identity, so one synthetic key is used
// and list position doubles as the tiebreak frame.
const TrackKey kKey{"py", "py"};

std::vector<ScoredItem> to_items(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("scores and labels must have the same length");
  std::vector<ScoredItem> items;
  for (std::size_t i = 0; i < scores.size(); ++i)
    items.push_back({scores[i], labels[i], {kKey.clip_id, kKey.person_id, static_cast<Frame>(i)}});
  return items;
}

FrameScoreTrack to_track(const std::vector<Frame>& frames, const std::vector<double>& scores) {
  if (frames.size() != scores.size())
    throw std::invalid_argument("frames and scores must have the same length");
  FrameScoreTrack t{kKey, {}};
  for (std::size_t i = 0; i < frames.size(); ++i) t.entries.push_back({frames[i], scores[i]});
  return t;
}

std::vector<double> scores_of(const FrameScoreTrack& t) {
  std::vector<double> out;
  for (const auto& e : t.entries) out.push_back(e.score);
  return out;
}

Dataset load_inputs(const std::map<std::string, std::filesystem::path>& scores,
                    const std::optional<std::filesystem::path>& segments,
                    const std::optional<std::filesystem::path>& quality,
                    const std::optional<std::filesystem::path>& labels, const std::string& format) {
  const auto fmt = parse_input_format(format);
  Dataset ds;
  for (const auto& [name, path] : scores) ds.scores[name] = load_score_file(path, fmt);
  if (segments) ds.segments = load_segment_file(*segments, fmt);
  if (quality) ds.quality = load_quality_file(*quality, fmt);
  if (labels) ds.labels = load_label_file(*labels, fmt);
  return ds;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Post-processing, fusion and evaluation for social interaction scores";

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base.ptr());

  m.def(
      "average_precision",
      [](const std::vector<double>& s, const std::vector<bool>& l) {
        return average_precision(to_items(s, l));
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "oracle_ap",
      [](const std::vector<double>& s, const std::vector<bool>& l) {
        return synth::oracle_ap(to_items(s, l));
      },
      py::arg("scores"), py::arg("labels"));
  m.def(
      "top1_accuracy",
      [](const std::vector<double>& s, const std::vector<bool>& l, double threshold) {
        return top1_accuracy(to_items(s, l), threshold);
      },
      py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);

  m.def(
      "fuse_segment",
      [](double v, double a, double q, const std::string& method) {
        return fuse_segment(v, a, q, parse_fusion_method(method));
      },
      py::arg("visual"), py::arg("audio"), py::arg("quality") = 0.5,
      py::arg("method") = "quality_weighted");

  m.def(
      "median_filter",
      [](const std::vector<double>& scores, int window) {
        std::vector<Frame> frames(scores.size());
        for (std::size_t i = 0; i < frames.size(); ++i) frames[i] = static_cast<Frame>(i);
        return scores_of(median_filter(to_track(frames, scores), MedianConfig(window)));
      },
      py::arg("scores"), py::arg("window") = MedianConfig::kDefaultWindow);
  m.def(
      "max_score_filter",
      [](const std::vector<Frame>& frames, const std::vector<double>& scores,
         const std::vector<std::pair<Frame, Frame>>& ranges) {
        std::vector<UtteranceSegment> segs;
        for (const auto& [a, b] : ranges) segs.push_back({kKey, a, b, std::nullopt, std::nullopt});
        std::vector<std::pair<double, std::int64_t>> out;
        for (const auto& s : max_score_filter(to_track(frames, scores), segs))
          out.emplace_back(s.visual_score, s.n_frames_covered);
        return out;
      },
      py::arg("frames"), py::arg("scores"), py::arg("segments"),
      "Per-segment (max visual score, frames covered) for inclusive frame ranges.");

  m.def(
      "validate",
      [](const std::map<std::string, std::filesystem::path>& scores,
         std::optional<std::filesystem::path> segments, std::optional<std::filesystem::path> quality,
         std::optional<std::filesystem::path> labels, const std::string& format) {
        return validate_dataset(load_inputs(scores, segments, quality, labels, format)).to_json();
      },
      py::arg("scores"), py::arg("segments") = py::none(), py::arg("quality") = py::none(),
      py::arg("labels") = py::none(), py::arg("format") = "jsonl",
      "Validation report as a JSON string.");

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config) {
        py::gil_scoped_release release;
        return run_pipeline(load_pipeline_config(config)).to_json();
      },
      py::arg("config"), "Runs a pipeline config file; returns the report as a JSON string.");

  m.def(
      "synth_generate",
      [](const std::string& config_json, const std::filesystem::path& out) {
        const auto cfg = synth::config_from_json(config_json);
        synth::write_scenario(out, synth::generate_scenario(cfg), cfg);
      },
      py::arg("config_json"), py::arg("out"));
  m.def(
      "compare_ttm_methods",
      [](const std::string& config_json) {
        const auto c = synth::compare_ttm_methods(
            synth::generate_scenario(synth::config_from_json(config_json)));
        return std::map<std::string, double>{{"raw_visual", c.raw_visual},
                                             {"filtered_visual", c.filtered_visual},
                                             {"audio", c.audio},
                                             {"average", c.average},
                                             {"quality_weighted", c.quality_weighted}};
      },
      py::arg("config_json"), "TTM mAP per scoring method on one generated scenario.");
}
