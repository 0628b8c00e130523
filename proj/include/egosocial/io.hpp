#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "egosocial/types.hpp"

namespace egosocial {

// Input encodings. JSONL is canonical: one JSON object per line. CSV carries
// the same fields with a header row naming the columns; optional fields may
// be left empty.
enum class InputFormat { kJsonl, kCsv };

InputFormat parse_input_format(const std::string& name);

// Parsers accept records in any order. Output tracks are sorted by key and
// entries by frame; segments are sorted by (key, start_frame). Blank lines are
// skipped. Malformed records, out-of-range values, duplicate (key, frame) pairs
// and (for segments) inverted or overlapping intervals throw ParseError
// carrying the 1-based line number.
std::vector<FrameScoreTrack> parse_score_file(std::istream& in,
                                              InputFormat fmt = InputFormat::kJsonl);
std::vector<UtteranceSegment> parse_segment_file(std::istream& in,
                                                 InputFormat fmt = InputFormat::kJsonl);
std::vector<QualityTrack> parse_quality_file(std::istream& in,
                                             InputFormat fmt = InputFormat::kJsonl);
std::vector<FrameLabelTrack> parse_label_file(std::istream& in,
                                              InputFormat fmt = InputFormat::kJsonl);

// Canonical JSONL writers. Numbers use the shortest representation that
// parses back to the same double, so write -> parse is lossless.
void write_score_file(std::ostream& out, const std::vector<FrameScoreTrack>& tracks);
void write_segment_file(std::ostream& out, const std::vector<UtteranceSegment>& segments);
void write_quality_file(std::ostream& out, const std::vector<QualityTrack>& tracks);
void write_label_file(std::ostream& out, const std::vector<FrameLabelTrack>& tracks);

// File-path conveniences. Missing or unreadable files throw IoError naming
// the path.
std::vector<FrameScoreTrack> load_score_file(const std::filesystem::path& path,
                                             InputFormat fmt = InputFormat::kJsonl);
std::vector<UtteranceSegment> load_segment_file(const std::filesystem::path& path,
                                                InputFormat fmt = InputFormat::kJsonl);
std::vector<QualityTrack> load_quality_file(const std::filesystem::path& path,
                                            InputFormat fmt = InputFormat::kJsonl);
std::vector<FrameLabelTrack> load_label_file(const std::filesystem::path& path,
                                             InputFormat fmt = InputFormat::kJsonl);

// Writes via a temporary sibling and rename.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

enum class Severity { kError, kWarning };

struct Issue {
  Severity severity = Severity::kError;
  std::string message;
  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  std::vector<Issue> issues;

  bool ok() const;  // no errors (warnings allowed)
  std::size_t error_count() const;
  std::size_t warning_count() const;
  std::string to_json() const;
};

// Checks every type invariant plus cross-file consistency. Never throws on bad
// data; violations are returned as issues.
ValidationReport validate_dataset(const Dataset& dataset);

}  // namespace egosocial
