#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace egosocial {

using Frame = std::int64_t;

// Base for all toolkit errors. Precondition violations on in-memory values
// use std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Input data violates a type invariant or cross-file consistency rule.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Raised when a metric has no defined value (e.g. AP with zero positives).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Identity of one tracked person inside one clip.
struct TrackKey {
  std::string clip_id;
  std::string person_id;

  auto operator<=>(const TrackKey&) const = default;
  bool operator==(const TrackKey&) const = default;

  std::string str() const { return clip_id + "/" + person_id; }
};

// Non-empty and free of record/field separators (newline, CR, tab, comma).
bool is_valid_identifier(const std::string& id);
bool is_valid(const TrackKey& key);

struct ScoreEntry {
  Frame frame = 0;
  double score = 0.0;
  bool operator==(const ScoreEntry&) const = default;
};

struct QualityEntry {
  Frame frame = 0;
  double quality = 0.0;
  bool operator==(const QualityEntry&) const = default;
};

struct LabelEntry {
  Frame frame = 0;
  bool label = false;
  bool operator==(const LabelEntry&) const = default;
};

// Frame-indexed predictions for one track; entries strictly increasing by frame.
struct FrameScoreTrack {
  TrackKey key;
  std::vector<ScoreEntry> entries;
  bool operator==(const FrameScoreTrack&) const = default;
};

struct QualityTrack {
  TrackKey key;
  std::vector<QualityEntry> entries;
  bool operator==(const QualityTrack&) const = default;
};

struct FrameLabelTrack {
  TrackKey key;
  std::vector<LabelEntry> entries;
  bool operator==(const FrameLabelTrack&) const = default;
};

// One utterance: an inclusive frame interval [start_frame, end_frame].
struct UtteranceSegment {
  TrackKey key;
  Frame start_frame = 0;
  Frame end_frame = 0;
  std::optional<double> audio_score;
  std::optional<bool> label;

  bool contains(Frame f) const { return start_frame <= f && f <= end_frame; }
  Frame length() const { return end_frame - start_frame + 1; }
  bool operator==(const UtteranceSegment&) const = default;
};

// Everything loaded for one run. Score tracks are grouped by source name
// (one source per input file); a source may contain at most one track per key,
// which validate_dataset() checks.
struct Dataset {
  std::map<std::string, std::vector<FrameScoreTrack>> scores;
  std::vector<UtteranceSegment> segments;
  std::vector<QualityTrack> quality;
  std::vector<FrameLabelTrack> labels;

  bool operator==(const Dataset&) const = default;
};

// Lookup helpers over sorted-by-key collections. Return nullptr when absent.
const FrameScoreTrack* find_track(const std::vector<FrameScoreTrack>& tracks,
                                  const TrackKey& key);
const QualityTrack* find_track(const std::vector<QualityTrack>& tracks,
                               const TrackKey& key);
const FrameLabelTrack* find_track(const std::vector<FrameLabelTrack>& tracks,
                                  const TrackKey& key);

// Segments grouped by key, each group sorted by start_frame.
std::map<TrackKey, std::vector<UtteranceSegment>> group_segments(
    const std::vector<UtteranceSegment>& segments);

}  // namespace egosocial
