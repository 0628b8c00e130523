// egosocial: score filtering, fusion, ensembling and evaluation for
// looking-at-me / talking-to-me predictions.
//
// Data goes to --out or stdout; logs and diagnostics go to stderr.

#include <algorithm>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "egosocial/eval.hpp"
#include "egosocial/fusion.hpp"
#include "egosocial/io.hpp"
#include "egosocial/pipeline.hpp"
#include "egosocial/synth.hpp"
#include "egosocial/temporal.hpp"

namespace fs = std::filesystem;
using namespace egosocial;

namespace {

struct Inputs {
  std::vector<std::string> scores;  // name=path
  std::string segments;
  std::string quality;
  std::string labels;
  std::string format = "jsonl";
};

struct Params {
  int window = MedianConfig::kDefaultWindow;
  std::string method = "quality_weighted";
  std::string weights;
  std::string align = "strict";
  double threshold = 0.5;
  bool per_clip = false;
  std::string missing = "error";
  std::string source;
  std::string median_stage = "fused";
  bool table = false;
  std::string out;
  std::string config;
};

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

std::map<std::string, fs::path> parse_named_paths(const std::vector<std::string>& specs) {
  std::map<std::string, fs::path> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
      throw ConfigError("--scores expects <name>=<path>, got '" + s + "'");
    if (!out.emplace(s.substr(0, eq), s.substr(eq + 1)).second)
      throw ConfigError("score source '" + s.substr(0, eq) + "' given twice");
  }
  return out;
}

std::vector<double> parse_weights(const std::string& text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad weight '" + item + "' in --weights");
    }
  }
  return out;
}

Dataset load_inputs(const Inputs& in) {
  PipelineConfig cfg;
  cfg.format = parse_input_format(in.format);
  cfg.scores = parse_named_paths(in.scores);
  if (!in.segments.empty()) cfg.segments = in.segments;
  if (!in.quality.empty()) cfg.quality = in.quality;
  if (!in.labels.empty()) cfg.labels = in.labels;
  return load_dataset(cfg, log_line);
}

const std::vector<FrameScoreTrack>& single_source(const Dataset& ds, const std::string& wanted) {
  if (!wanted.empty()) {
    auto it = ds.scores.find(wanted);
    if (it == ds.scores.end()) throw ConfigError("unknown source '" + wanted + "'");
    return it->second;
  }
  if (ds.scores.size() != 1)
    throw ConfigError("expected exactly one --scores input (or --source to pick one)");
  return ds.scores.begin()->second;
}

void emit(const std::string& out_path, const std::string& contents) {
  if (out_path.empty() || out_path == "-")
    std::cout << contents << std::flush;
  else
    write_text_file(out_path, contents);
}

std::string tracks_text(const std::vector<FrameScoreTrack>& tracks) {
  std::ostringstream os;
  write_score_file(os, tracks);
  return os.str();
}

void require_scores(const Inputs& in) {
  if (in.scores.empty()) throw ConfigError("--scores is required");
}

int finish_report(const EvalReport& report, const Params& p, const std::string& method) {
  for (const auto& w : report.warnings) log_line("warning: " + w);
  emit(p.out, report.to_json());
  if (p.table) std::cerr << report.to_table(method);
  return report.map ? kExitOk : kExitUndefinedMetric;
}

void add_inputs(CLI::App* cmd, Inputs& in, bool segments, bool quality, bool labels) {
  cmd->add_option("--scores", in.scores, "Score file as <name>=<path> (repeatable)");
  if (segments) cmd->add_option("--segments", in.segments, "Utterance segment file");
  if (quality) cmd->add_option("--quality", in.quality, "Face quality file");
  if (labels) cmd->add_option("--labels", in.labels, "Frame label file");
  cmd->add_option("--input-format", in.format, "Input encoding: jsonl or csv")
      ->check(CLI::IsMember({"jsonl", "csv"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Post-processing, fusion and evaluation for social interaction scores"};
  app.require_subcommand(1);
  Inputs in;
  Params p;
  std::function<int()> action;

  // validate
  auto* validate = app.add_subcommand("validate", "Check input files against the data model");
  add_inputs(validate, in, true, true, true);
  validate->callback([&] {
    action = [&] {
      Dataset ds;
      PipelineConfig cfg;
      cfg.format = parse_input_format(in.format);
      for (const auto& [name, path] : parse_named_paths(in.scores))
        ds.scores[name] = load_score_file(path, cfg.format);
      if (!in.segments.empty()) ds.segments = load_segment_file(in.segments, cfg.format);
      if (!in.quality.empty()) ds.quality = load_quality_file(in.quality, cfg.format);
      if (!in.labels.empty()) ds.labels = load_label_file(in.labels, cfg.format);
      const auto report = validate_dataset(ds);
      std::cout << report.to_json();
      return report.ok() ? kExitOk : kExitValidation;
    };
  });

  // filter median | maxseg
  auto* filter = app.add_subcommand("filter", "Temporal filters");
  filter->require_subcommand(1);
  auto* median = filter->add_subcommand("median", "Median-smooth score tracks");
  add_inputs(median, in, false, false, false);
  median->add_option("--window", p.window, "Odd window size in entries");
  median->add_option("--source", p.source, "Score source to filter");
  median->add_option("--out", p.out, "Output score file (default stdout)");
  median->callback([&] {
    action = [&] {
      require_scores(in);
      const MedianConfig cfg(p.window);
      const Dataset ds = load_inputs(in);
      std::vector<FrameScoreTrack> out;
      for (const auto& t : single_source(ds, p.source)) out.push_back(median_filter(t, cfg));
      emit(p.out, tracks_text(out));
      return kExitOk;
    };
  });

  auto* maxseg = filter->add_subcommand("maxseg", "Utterance-level max of visual scores");
  add_inputs(maxseg, in, true, false, false);
  maxseg->add_option("--source", p.source, "Visual score source");
  maxseg->add_option("--out", p.out, "Output segment file (default stdout)");
  maxseg->callback([&] {
    action = [&] {
      require_scores(in);
      if (in.segments.empty()) throw ConfigError("--segments is required");
      const Dataset ds = load_inputs(in);
      const auto& visual = single_source(ds, p.source);
      std::ostringstream os;
      for (const auto& [key, segs] : group_segments(ds.segments)) {
        const FrameScoreTrack empty{key, {}};
        const auto* track = find_track(visual, key);
        for (const auto& s : max_score_filter(track ? *track : empty, segs)) {
          nlohmann::ordered_json j;
          j["clip_id"] = key.clip_id;
          j["person_id"] = key.person_id;
          j["start_frame"] = s.segment.start_frame;
          j["end_frame"] = s.segment.end_frame;
          if (s.segment.audio_score) j["audio_score"] = *s.segment.audio_score;
          if (s.segment.label) j["label"] = *s.segment.label ? 1 : 0;
          j["visual_score"] = s.visual_score;
          j["n_frames_covered"] = s.n_frames_covered;
          os << j.dump() << '\n';
          if (!s.covered())
            log_line("warning: segment " + key.str() + " [" +
                     std::to_string(s.segment.start_frame) + "," +
                     std::to_string(s.segment.end_frame) + "] has no visual frames");
        }
      }
      emit(p.out, os.str());
      return kExitOk;
    };
  });

  // fuse
  auto* fuse = app.add_subcommand("fuse", "Audio-visual fusion of talking-to-me scores");
  add_inputs(fuse, in, true, true, false);
  fuse->add_option("--source", p.source, "Visual score source");
  fuse->add_option("--method", p.method, "average or quality_weighted")
      ->check(CLI::IsMember({"average", "quality_weighted"}));
  fuse->add_option("--window", p.window, "Median window (1 disables smoothing)");
  fuse->add_option("--median-stage", p.median_stage, "fused, visual or none")
      ->check(CLI::IsMember({"fused", "visual", "none"}));
  fuse->add_option("--out", p.out, "Output score file (default stdout)");
  fuse->callback([&] {
    action = [&] {
      require_scores(in);
      if (in.segments.empty()) throw ConfigError("--segments is required");
      const FuseOptions opts{parse_fusion_method(p.method), MedianConfig(p.window),
                             parse_median_stage(p.median_stage)};
      const Dataset ds = load_inputs(in);
      std::string source = p.source;
      if (source.empty()) {
        if (ds.scores.size() != 1) throw ConfigError("several --scores given; pick one with --source");
        source = ds.scores.begin()->first;
      }
      auto result = fuse_ttm(ds, source, opts);
      for (const auto& w : result.warnings) log_line("warning: " + w);
      emit(p.out, tracks_text(result.tracks));
      return kExitOk;
    };
  });

  // ensemble
  auto* ensemble = app.add_subcommand("ensemble", "Weighted mean of several score sources");
  add_inputs(ensemble, in, false, false, false);
  ensemble->add_option("--weights", p.weights, "Comma-separated weights, one per --scores");
  ensemble->add_option("--align", p.align, "strict or intersect")
      ->check(CLI::IsMember({"strict", "intersect"}));
  ensemble->add_option("--out", p.out, "Output score file (default stdout)");
  ensemble->callback([&] {
    action = [&] {
      require_scores(in);
      EnsembleSpec spec;
      // Members follow command-line order so weights line up with --scores.
      for (const auto& s : in.scores) spec.sources.push_back(s.substr(0, s.find('=')));
      spec.weights = parse_weights(p.weights);
      spec.normalized_weights();
      const auto align = parse_align_mode(p.align);
      const Dataset ds = load_inputs(in);
      auto result = ensemble_sources(ds, spec, align);
      for (const auto& w : result.warnings) log_line("warning: " + w);
      emit(p.out, tracks_text(result.tracks));
      return kExitOk;
    };
  });

  // eval lam | ttm
  auto* eval = app.add_subcommand("eval", "Compute mAP and top-1 accuracy");
  eval->require_subcommand(1);
  auto add_eval_options = [&](CLI::App* cmd) {
    cmd->add_option("--source", p.source, "Score source to evaluate");
    cmd->add_option("--threshold", p.threshold, "Accuracy threshold (score >= t is positive)");
    cmd->add_flag("--per-clip", p.per_clip, "Mean of per-clip APs instead of pooled AP");
    cmd->add_flag("--table", p.table, "Also print a plain-text summary table to stderr");
    cmd->add_option("--out", p.out, "Report path (default stdout)");
  };
  auto* eval_lam = eval->add_subcommand("lam", "Frame-level looking-at-me evaluation");
  add_inputs(eval_lam, in, false, false, true);
  add_eval_options(eval_lam);
  eval_lam->add_option("--missing", p.missing, "Labeled frames without prediction: error or zero")
      ->check(CLI::IsMember({"error", "zero"}));
  eval_lam->callback([&] {
    action = [&] {
      require_scores(in);
      if (in.labels.empty()) throw ConfigError("--labels is required");
      const EvalOptions opts{p.threshold, p.per_clip, parse_missing_policy(p.missing)};
      const Dataset ds = load_inputs(in);
      return finish_report(evaluate_lam(single_source(ds, p.source), ds.labels, opts), p, "LAM");
    };
  });
  auto* eval_ttm = eval->add_subcommand("ttm", "Talking-to-me evaluation over labeled utterances");
  add_inputs(eval_ttm, in, true, false, false);
  add_eval_options(eval_ttm);
  eval_ttm->callback([&] {
    action = [&] {
      require_scores(in);
      if (in.segments.empty()) throw ConfigError("--segments is required");
      const EvalOptions opts{p.threshold, p.per_clip, MissingPolicy::kError};
      const Dataset ds = load_inputs(in);
      return finish_report(evaluate_ttm(single_source(ds, p.source), ds.segments, opts), p,
                           "TTM");
    };
  });

  // synth gen
  auto* synth_cmd = app.add_subcommand("synth", "Synthetic scenarios");
  synth_cmd->require_subcommand(1);
  auto* gen = synth_cmd->add_subcommand("gen", "Generate a seeded synthetic scenario");
  synth::ScenarioConfig scenario;
  std::optional<std::uint64_t> seed;
  gen->add_option("--config", p.config, "Scenario config JSON (flags below override it)");
  gen->add_option("--seed", seed, "Random seed");
  gen->add_option("--out", p.out, "Output directory")->required();
  std::map<std::string, std::string> overrides;
  for (const char* name : {"n-clips", "frames-per-clip", "persons-per-clip", "utterance-rate",
                           "positive-fraction", "gaze-aversion-prob", "audio-fp-rate",
                           "visual-noise-sigma", "quality-noise-coupling", "n-visual-sources"}) {
    gen->add_option_function<std::string>(
        std::string("--") + name, [&overrides, name](const std::string& v) { overrides[name] = v; },
        "Scenario field override");
  }
  gen->callback([&] {
    action = [&] {
      if (!p.config.empty()) {
        std::ifstream f(p.config);
        if (!f) throw IoError("cannot open config file: " + p.config);
        std::stringstream buf;
        buf << f.rdbuf();
        scenario = synth::config_from_json(buf.str());
      }
      if (!overrides.empty()) {
        nlohmann::json j = nlohmann::json::parse(synth::config_to_json(scenario));
        for (const auto& [flag, value] : overrides) {
          std::string field = flag;
          std::replace(field.begin(), field.end(), '-', '_');
          try {
            j[field] = nlohmann::json::parse(value);
          } catch (const nlohmann::json::exception&) {
            throw ConfigError("bad value '" + value + "' for --" + flag);
          }
        }
        scenario = synth::config_from_json(j.dump());
      }
      if (seed) scenario.seed = *seed;
      const auto generated = synth::generate_scenario(scenario);
      synth::write_scenario(p.out, generated, scenario);
      log_line("wrote scenario (seed " + std::to_string(scenario.seed) + ") to " + p.out);
      return kExitOk;
    };
  });

  // pipeline run
  auto* pipeline = app.add_subcommand("pipeline", "Config-driven pipelines");
  pipeline->require_subcommand(1);
  auto* run = pipeline->add_subcommand("run", "Run a pipeline config end to end");
  run->add_option("--config", p.config, "Pipeline config JSON")->required();
  run->add_option("--out", p.out, "Report path (overrides the config's outputs.report)");
  run->callback([&] {
    action = [&] {
      auto cfg = load_pipeline_config(p.config);
      if (!p.out.empty()) cfg.report = p.out;
      const auto report = run_pipeline(cfg, log_line);
      if (!cfg.report) std::cout << report.to_json();
      return report.map ? kExitOk : kExitUndefinedMetric;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    return action ? action() : kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for_current_exception();
  }
}
