#include "egosocial/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace egosocial {

using json = nlohmann::json;

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const ConfigError&) {
    return kExitConfig;
  } catch (const IoError&) {
    return kExitMissingFile;
  } catch (const UndefinedMetricError&) {
    return kExitUndefinedMetric;
  } catch (const Error&) {
    return kExitValidation;
  } catch (const std::invalid_argument&) {
    return kExitValidation;
  } catch (...) {
    return kExitConfig;
  }
}

std::string Stage::name(Op op) {
  switch (op) {
    case Op::kEnsemble: return "ensemble";
    case Op::kMedian: return "median";
    case Op::kMaxSeg: return "maxseg";
    case Op::kFuse: return "fuse";
    case Op::kEvaluate: return "evaluate";
  }
  return "?";
}

void PipelineConfig::validate() const {
  using Op = Stage::Op;
  if (scores.empty()) throw ConfigError("pipeline needs at least one score input");
  if (stages.empty() || stages.back().op != Op::kEvaluate)
    throw ConfigError("pipeline must end with an evaluate stage");

  bool fused = false;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto& s = stages[i];
    const std::string where = "stage " + std::to_string(i) + " (" + Stage::name(s.op) + ")";
    switch (s.op) {
      case Op::kEnsemble:
        if (i != 0) throw ConfigError(where + ": ensemble must be the first stage");
        for (const auto& src : s.ensemble.sources)
          if (!scores.contains(src)) throw ConfigError(where + ": unknown source '" + src + "'");
        s.ensemble.normalized_weights();
        break;
      case Op::kMedian:
        break;
      case Op::kMaxSeg:
        if (task != Task::kTtm) throw ConfigError(where + ": max-score filter is TTM-only");
        if (fused) throw ConfigError(where + ": max-score filter must precede fusion");
        break;
      case Op::kFuse:
        if (task != Task::kTtm) throw ConfigError(where + ": fusion is TTM-only");
        if (fused) throw ConfigError(where + ": fusion may appear only once");
        fused = true;
        break;
      case Op::kEvaluate:
        if (i + 1 != stages.size()) throw ConfigError(where + ": evaluate must be the last stage");
        break;
    }
  }

  if (stages.front().op != Op::kEnsemble) {
    if (source) {
      if (!scores.contains(*source)) throw ConfigError("unknown source '" + *source + "'");
    } else if (scores.size() != 1) {
      throw ConfigError("several score inputs given; name the working one with \"source\"");
    }
  }
  if (task == Task::kLam && !labels) throw ConfigError("LAM pipeline needs a labels input");
  if (task == Task::kTtm && !segments) throw ConfigError("TTM pipeline needs a segments input");
  for (const auto& s : stages) {
    if (s.op == Op::kFuse && s.method == FusionMethod::kQualityWeighted && !quality)
      throw ConfigError("quality-weighted fusion needs a quality input");
  }
}

namespace {

template <typename T>
T get_or(const json& j, const char* field, T fallback) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

Stage parse_stage(const json& j) {
  if (!j.is_object()) throw ConfigError("each stage must be a JSON object");
  const auto op = j.at("op").get<std::string>();
  Stage s;
  if (op == "ensemble") {
    s.op = Stage::Op::kEnsemble;
    s.ensemble.sources = j.at("sources").get<std::vector<std::string>>();
    s.ensemble.weights = get_or(j, "weights", std::vector<double>{});
    s.align = parse_align_mode(get_or<std::string>(j, "align", "strict"));
  } else if (op == "median") {
    s.op = Stage::Op::kMedian;
    s.median = MedianConfig(get_or(j, "window", MedianConfig::kDefaultWindow));
  } else if (op == "maxseg") {
    s.op = Stage::Op::kMaxSeg;
  } else if (op == "fuse") {
    s.op = Stage::Op::kFuse;
    s.method = parse_fusion_method(get_or<std::string>(j, "method", "quality_weighted"));
    s.median = MedianConfig(get_or(j, "window", MedianConfig::kDefaultWindow));
    s.median_stage = parse_median_stage(get_or<std::string>(j, "median_stage", "none"));
  } else if (op == "evaluate") {
    s.op = Stage::Op::kEvaluate;
    s.eval.threshold = get_or(j, "threshold", 0.5);
    s.eval.per_clip = get_or(j, "per_clip", false);
    s.eval.missing = parse_missing_policy(get_or<std::string>(j, "missing", "error"));
  } else {
    throw ConfigError("unknown stage op '" + op + "'");
  }
  return s;
}

void write_tracks(const std::filesystem::path& path, const std::vector<FrameScoreTrack>& tracks) {
  std::ostringstream os;
  write_score_file(os, tracks);
  write_text_file(path, os.str());
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& text,
                                     const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline config is not valid JSON: ") + e.what());
  }
  PipelineConfig cfg;
  try {
    const auto task = j.at("task").get<std::string>();
    if (task == "lam")
      cfg.task = Task::kLam;
    else if (task == "ttm")
      cfg.task = Task::kTtm;
    else
      throw ConfigError("unknown task '" + task + "' (expected lam or ttm)");

    const json& in = j.at("inputs");
    cfg.format = parse_input_format(get_or<std::string>(in, "format", "jsonl"));
    for (const auto& [name, path] : in.at("scores").items())
      cfg.scores[name] = resolve(base_dir, path.get<std::string>());
    if (auto p = get_or<std::string>(in, "segments", ""); !p.empty())
      cfg.segments = resolve(base_dir, p);
    if (auto p = get_or<std::string>(in, "quality", ""); !p.empty())
      cfg.quality = resolve(base_dir, p);
    if (auto p = get_or<std::string>(in, "labels", ""); !p.empty())
      cfg.labels = resolve(base_dir, p);
    if (auto s = get_or<std::string>(j, "source", ""); !s.empty()) cfg.source = s;

    for (const auto& st : j.at("stages")) cfg.stages.push_back(parse_stage(st));

    if (auto out = j.find("outputs"); out != j.end()) {
      if (auto p = get_or<std::string>(*out, "report", ""); !p.empty())
        cfg.report = resolve(base_dir, p);
      if (auto p = get_or<std::string>(*out, "intermediates", ""); !p.empty())
        cfg.intermediates = resolve(base_dir, p);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad pipeline config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_pipeline_config(buf.str(), path.parent_path());
}

Dataset load_dataset(const PipelineConfig& cfg, const LogFn& log) {
  Dataset ds;
  for (const auto& [name, path] : cfg.scores) ds.scores[name] = load_score_file(path, cfg.format);
  if (cfg.segments) ds.segments = load_segment_file(*cfg.segments, cfg.format);
  if (cfg.quality) ds.quality = load_quality_file(*cfg.quality, cfg.format);
  if (cfg.labels) ds.labels = load_label_file(*cfg.labels, cfg.format);

  const auto report = validate_dataset(ds);
  for (const auto& issue : report.issues) {
    if (log) log((issue.severity == Severity::kError ? "error: " : "warning: ") + issue.message);
  }
  if (!report.ok())
    throw ValidationError("input validation failed with " +
                          std::to_string(report.error_count()) + " error(s)");
  return ds;
}

EvalReport run_pipeline(const PipelineConfig& cfg, const LogFn& log) {
  using Op = Stage::Op;
  cfg.validate();
  const Dataset ds = load_dataset(cfg, log);
  auto note = [&](const std::string& msg) {
    if (log) log(msg);
  };

  std::vector<std::string> warnings;
  std::vector<FrameScoreTrack> current;
  if (cfg.stages.front().op != Op::kEnsemble)
    current = ds.scores.at(cfg.source ? *cfg.source : ds.scores.begin()->first);

  for (std::size_t i = 0; i < cfg.stages.size(); ++i) {
    const Stage& st = cfg.stages[i];
    note("stage " + std::to_string(i) + ": " + Stage::name(st.op));
    switch (st.op) {
      case Op::kEnsemble: {
        auto r = ensemble_sources(ds, st.ensemble, st.align);
        current = std::move(r.tracks);
        warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
        break;
      }
      case Op::kMedian:
        for (auto& t : current) t = median_filter(t, st.median);
        break;
      case Op::kMaxSeg:
        current = max_filter_tracks(current, ds.segments, &warnings);
        break;
      case Op::kFuse: {
        Dataset view;
        view.scores["working"] = std::move(current);
        view.segments = ds.segments;
        view.quality = ds.quality;
        auto r = fuse_ttm(view, "working", {st.method, st.median, st.median_stage});
        current = std::move(r.tracks);
        warnings.insert(warnings.end(), r.warnings.begin(), r.warnings.end());
        break;
      }
      case Op::kEvaluate: {
        EvalReport report = cfg.task == Task::kLam ? evaluate_lam(current, ds.labels, st.eval)
                                                   : evaluate_ttm(current, ds.segments, st.eval);
        warnings.insert(warnings.end(), report.warnings.begin(), report.warnings.end());
        report.warnings = std::move(warnings);
        for (const auto& w : report.warnings) note("warning: " + w);
        if (cfg.report) write_text_file(*cfg.report, report.to_json());
        return report;
      }
    }
    if (cfg.intermediates) {
      char name[64];
      std::snprintf(name, sizeof name, "%02zu_%s.jsonl", i, Stage::name(st.op).c_str());
      write_tracks(*cfg.intermediates / name, current);
    }
  }
  throw ConfigError("pipeline has no evaluate stage");
}

}  // namespace egosocial
