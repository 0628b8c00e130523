#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "egosocial/eval.hpp"
#include "egosocial/fusion.hpp"
#include "egosocial/io.hpp"

namespace egosocial {

enum class Task { kLam, kTtm };

// Process exit statuses shared by every CLI subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitMissingFile = 2,
  kExitValidation = 3,
  kExitUndefinedMetric = 4,
};

// Maps an in-flight exception to its exit status. Call from a catch block.
int exit_code_for_current_exception();

struct Stage {
  enum class Op { kEnsemble, kMedian, kMaxSeg, kFuse, kEvaluate };

  Op op = Op::kEvaluate;
  // ensemble
  EnsembleSpec ensemble;
  AlignMode align = AlignMode::kStrict;
  // median, and the in-fuse median when median_stage != none
  MedianConfig median;
  // fuse
  FusionMethod method = FusionMethod::kQualityWeighted;
  MedianStage median_stage = MedianStage::kNone;
  // evaluate
  EvalOptions eval;

  static std::string name(Op op);
};

// The stage list applies to one working set of score tracks. It starts as the
// ensemble output, or as `source` (which may be omitted when only one score
// source is given).
struct PipelineConfig {
  Task task = Task::kLam;
  InputFormat format = InputFormat::kJsonl;
  std::map<std::string, std::filesystem::path> scores;
  std::optional<std::filesystem::path> segments;
  std::optional<std::filesystem::path> quality;
  std::optional<std::filesystem::path> labels;
  std::optional<std::string> source;
  std::vector<Stage> stages;
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> intermediates;

  // Stage-order and input-role checks; throws ConfigError.
  void validate() const;
};

// Parses a JSON pipeline config. Relative paths resolve against base_dir.
PipelineConfig parse_pipeline_config(const std::string& text,
                                     const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

using LogFn = std::function<void(const std::string&)>;

// Loads and validates inputs, runs the stages in order, writes intermediates
// and the report when configured. An undefined mAP is not an exception: the
// report carries map = null.
EvalReport run_pipeline(const PipelineConfig& config, const LogFn& log = {});

// Loads inputs named by the config into a Dataset and validates it, throwing
// ValidationError on any error-level issue.
Dataset load_dataset(const PipelineConfig& config, const LogFn& log = {});

}  // namespace egosocial
