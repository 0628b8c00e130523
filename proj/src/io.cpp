#include "egosocial/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <limits>
#include <set>
#include <span>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace egosocial {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kIntegerFields[] = {"frame", "start_frame", "end_frame",
                                          "label", "n_frames_covered"};
constexpr const char* kStringFields[] = {"clip_id", "person_id"};

bool is_one_of(const std::string& name, std::span<const char* const> names) {
  return std::any_of(names.begin(), names.end(),
                     [&](const char* n) { return name == n; });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '\t'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

// Streams records as JSON objects regardless of the input encoding.
class RecordReader {
 public:
  RecordReader(std::istream& in, InputFormat fmt) : in_(in), fmt_(fmt) {}

  // Returns false at end of input.
  bool next(json& record) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (trim(line).empty()) continue;
      if (fmt_ == InputFormat::kCsv && header_.empty()) {
        for (auto col : split_commas(line)) header_.emplace_back(col);
        continue;
      }
      record = fmt_ == InputFormat::kJsonl ? parse_json(line) : parse_csv(line);
      return true;
    }
    return false;
  }

  std::size_t line() const { return line_no_; }

 private:
  json parse_json(const std::string& line) const {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(line_no_, std::string("invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError(line_no_, "record is not a JSON object");
    return j;
  }

  json parse_csv(const std::string& line) const {
    auto cells = split_commas(line);
    if (cells.size() != header_.size()) {
      throw ParseError(line_no_, "expected " + std::to_string(header_.size()) +
                                     " CSV columns, got " + std::to_string(cells.size()));
    }
    json j = json::object();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& name = header_[i];
      std::string_view cell = cells[i];
      if (cell.empty()) continue;
      if (is_one_of(name, kStringFields)) {
        j[name] = std::string(cell);
      } else if (is_one_of(name, kIntegerFields)) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || p != cell.data() + cell.size())
          throw ParseError(line_no_, "field '" + name + "' is not an integer");
        j[name] = v;
      } else {
        double v = 0;
        auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || p != cell.data() + cell.size())
          j[name] = std::string(cell);
        else
          j[name] = v;
      }
    }
    return j;
  }

  std::istream& in_;
  InputFormat fmt_;
  std::vector<std::string> header_;
  std::size_t line_no_ = 0;
};

const json& require(const json& rec, const char* field, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end() || it->is_null())
    throw ParseError(line, std::string("missing field '") + field + "'");
  return *it;
}

std::string get_identifier(const json& rec, const char* field, std::size_t line) {
  const json& v = require(rec, field, line);
  if (!v.is_string()) throw ParseError(line, std::string("field '") + field + "' must be a string");
  auto s = v.get<std::string>();
  if (!is_valid_identifier(s))
    throw ParseError(line, std::string("field '") + field +
                               "' must be non-empty without separator characters");
  return s;
}

TrackKey get_key(const json& rec, std::size_t line) {
  return TrackKey{get_identifier(rec, "clip_id", line),
                  get_identifier(rec, "person_id", line)};
}

Frame get_frame(const json& v, const char* field, std::size_t line) {
  if (!v.is_number_integer())
    throw ParseError(line, std::string("field '") + field + "' must be an integer");
  if (v.is_number_unsigned()) {
    auto u = v.get<std::uint64_t>();
    if (u > static_cast<std::uint64_t>(std::numeric_limits<Frame>::max()))
      throw ParseError(line, std::string("field '") + field + "' out of range");
    return static_cast<Frame>(u);
  }
  auto f = v.get<std::int64_t>();
  if (f < 0) throw ParseError(line, std::string("field '") + field + "' must be non-negative");
  return f;
}

double get_unit(const json& v, const char* field, std::size_t line) {
  if (!v.is_number()) throw ParseError(line, std::string("field '") + field + "' must be a number");
  double d = v.get<double>();
  if (!std::isfinite(d) || d < 0.0 || d > 1.0) {
    std::ostringstream os;
    os << "field '" << field << "' = " << d << " outside [0,1]";
    throw ParseError(line, os.str());
  }
  return d;
}

bool get_label(const json& v, std::size_t line) {
  if (!v.is_number_integer())
    throw ParseError(line, "field 'label' must be 0 or 1");
  auto l = v.get<std::int64_t>();
  if (l != 0 && l != 1) throw ParseError(line, "field 'label' must be 0 or 1");
  return l == 1;
}

template <typename Entry>
struct Row {
  TrackKey key;
  Entry entry;
  std::size_t line;
};

// Groups rows into tracks sorted by key with entries sorted by frame.
template <typename Track, typename Entry>
std::vector<Track> group_rows(std::vector<Row<Entry>> rows) {
  std::sort(rows.begin(), rows.end(), [](const Row<Entry>& a, const Row<Entry>& b) {
    return std::tie(a.key, a.entry.frame, a.line) < std::tie(b.key, b.entry.frame, b.line);
  });
  std::vector<Track> tracks;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (i > 0 && rows[i - 1].key == r.key && rows[i - 1].entry.frame == r.entry.frame) {
      throw ParseError(std::max(r.line, rows[i - 1].line),
                       "duplicate frame " + std::to_string(r.entry.frame) + " for " +
                           r.key.str() + " (first seen on line " +
                           std::to_string(std::min(r.line, rows[i - 1].line)) + ")");
    }
    if (tracks.empty() || tracks.back().key != r.key) tracks.push_back(Track{r.key, {}});
    tracks.back().entries.push_back(r.entry);
  }
  return tracks;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file: " + path.string());
  return in;
}

template <typename T>
void put_optional(ordered_json& j, const char* field, const std::optional<T>& v) {
  if (v) j[field] = *v;
}

}  // namespace

InputFormat parse_input_format(const std::string& name) {
  if (name == "jsonl") return InputFormat::kJsonl;
  if (name == "csv") return InputFormat::kCsv;
  throw ConfigError("unknown input format '" + name + "' (expected jsonl or csv)");
}

std::vector<FrameScoreTrack> parse_score_file(std::istream& in, InputFormat fmt) {
  RecordReader reader(in, fmt);
  std::vector<Row<ScoreEntry>> rows;
  json rec;
  while (reader.next(rec)) {
    const auto line = reader.line();
    rows.push_back({get_key(rec, line),
                    {get_frame(require(rec, "frame", line), "frame", line),
                     get_unit(require(rec, "score", line), "score", line)},
                    line});
  }
  return group_rows<FrameScoreTrack>(std::move(rows));
}

std::vector<QualityTrack> parse_quality_file(std::istream& in, InputFormat fmt) {
  RecordReader reader(in, fmt);
  std::vector<Row<QualityEntry>> rows;
  json rec;
  while (reader.next(rec)) {
    const auto line = reader.line();
    rows.push_back({get_key(rec, line),
                    {get_frame(require(rec, "frame", line), "frame", line),
                     get_unit(require(rec, "quality", line), "quality", line)},
                    line});
  }
  return group_rows<QualityTrack>(std::move(rows));
}

std::vector<FrameLabelTrack> parse_label_file(std::istream& in, InputFormat fmt) {
  RecordReader reader(in, fmt);
  std::vector<Row<LabelEntry>> rows;
  json rec;
  while (reader.next(rec)) {
    const auto line = reader.line();
    rows.push_back({get_key(rec, line),
                    {get_frame(require(rec, "frame", line), "frame", line),
                     get_label(require(rec, "label", line), line)},
                    line});
  }
  return group_rows<FrameLabelTrack>(std::move(rows));
}

std::vector<UtteranceSegment> parse_segment_file(std::istream& in, InputFormat fmt) {
  RecordReader reader(in, fmt);
  std::vector<std::pair<UtteranceSegment, std::size_t>> rows;
  json rec;
  while (reader.next(rec)) {
    const auto line = reader.line();
    UtteranceSegment seg;
    seg.key = get_key(rec, line);
    seg.start_frame = get_frame(require(rec, "start_frame", line), "start_frame", line);
    seg.end_frame = get_frame(require(rec, "end_frame", line), "end_frame", line);
    if (seg.start_frame > seg.end_frame) {
      throw ParseError(line, "start_frame " + std::to_string(seg.start_frame) +
                                 " > end_frame " + std::to_string(seg.end_frame));
    }
    if (auto it = rec.find("audio_score"); it != rec.end() && !it->is_null())
      seg.audio_score = get_unit(*it, "audio_score", line);
    if (auto it = rec.find("label"); it != rec.end() && !it->is_null())
      seg.label = get_label(*it, line);
    rows.emplace_back(std::move(seg), line);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first.key, a.first.start_frame, a.second) <
           std::tie(b.first.key, b.first.start_frame, b.second);
  });
  std::vector<UtteranceSegment> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [seg, line] = rows[i];
    if (i > 0) {
      const auto& [prev, prev_line] = rows[i - 1];
      if (prev.key == seg.key && seg.start_frame <= prev.end_frame) {
        throw ParseError(std::max(line, prev_line),
                         "segment [" + std::to_string(seg.start_frame) + "," +
                             std::to_string(seg.end_frame) + "] overlaps [" +
                             std::to_string(prev.start_frame) + "," +
                             std::to_string(prev.end_frame) + "] for " + seg.key.str() +
                             " (lines " + std::to_string(std::min(line, prev_line)) +
                             " and " + std::to_string(std::max(line, prev_line)) + ")");
      }
    }
    out.push_back(seg);
  }
  return out;
}

void write_score_file(std::ostream& out, const std::vector<FrameScoreTrack>& tracks) {
  for (const auto& t : tracks) {
    for (const auto& e : t.entries) {
      ordered_json j;
      j["clip_id"] = t.key.clip_id;
      j["person_id"] = t.key.person_id;
      j["frame"] = e.frame;
      j["score"] = e.score;
      out << j.dump() << '\n';
    }
  }
}

void write_quality_file(std::ostream& out, const std::vector<QualityTrack>& tracks) {
  for (const auto& t : tracks) {
    for (const auto& e : t.entries) {
      ordered_json j;
      j["clip_id"] = t.key.clip_id;
      j["person_id"] = t.key.person_id;
      j["frame"] = e.frame;
      j["quality"] = e.quality;
      out << j.dump() << '\n';
    }
  }
}

void write_label_file(std::ostream& out, const std::vector<FrameLabelTrack>& tracks) {
  for (const auto& t : tracks) {
    for (const auto& e : t.entries) {
      ordered_json j;
      j["clip_id"] = t.key.clip_id;
      j["person_id"] = t.key.person_id;
      j["frame"] = e.frame;
      j["label"] = e.label ? 1 : 0;
      out << j.dump() << '\n';
    }
  }
}

void write_segment_file(std::ostream& out, const std::vector<UtteranceSegment>& segments) {
  for (const auto& s : segments) {
    ordered_json j;
    j["clip_id"] = s.key.clip_id;
    j["person_id"] = s.key.person_id;
    j["start_frame"] = s.start_frame;
    j["end_frame"] = s.end_frame;
    put_optional(j, "audio_score", s.audio_score);
    if (s.label) j["label"] = *s.label ? 1 : 0;
    out << j.dump() << '\n';
  }
}

std::vector<FrameScoreTrack> load_score_file(const std::filesystem::path& path,
                                             InputFormat fmt) {
  auto in = open_input(path);
  return parse_score_file(in, fmt);
}

std::vector<UtteranceSegment> load_segment_file(const std::filesystem::path& path,
                                                InputFormat fmt) {
  auto in = open_input(path);
  return parse_segment_file(in, fmt);
}

std::vector<QualityTrack> load_quality_file(const std::filesystem::path& path,
                                            InputFormat fmt) {
  auto in = open_input(path);
  return parse_quality_file(in, fmt);
}

std::vector<FrameLabelTrack> load_label_file(const std::filesystem::path& path,
                                             InputFormat fmt) {
  auto in = open_input(path);
  return parse_label_file(in, fmt);
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write file: " + tmp.string());
    out << contents;
    if (!out.flush()) throw IoError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Validation

bool ValidationReport::ok() const { return error_count() == 0; }

std::size_t ValidationReport::error_count() const {
  return static_cast<std::size_t>(std::count_if(
      issues.begin(), issues.end(), [](const Issue& i) { return i.severity == Severity::kError; }));
}

std::size_t ValidationReport::warning_count() const { return issues.size() - error_count(); }

std::string ValidationReport::to_json() const {
  ordered_json j;
  j["ok"] = ok();
  j["errors"] = error_count();
  j["warnings"] = warning_count();
  auto list = ordered_json::array();
  for (const auto& i : issues) {
    ordered_json item;
    item["severity"] = i.severity == Severity::kError ? "error" : "warning";
    item["message"] = i.message;
    list.push_back(std::move(item));
  }
  j["issues"] = std::move(list);
  return j.dump(2) + "\n";
}

namespace {

class Checker {
 public:
  void error(std::string msg) { report_.issues.push_back({Severity::kError, std::move(msg)}); }
  void warn(std::string msg) { report_.issues.push_back({Severity::kWarning, std::move(msg)}); }

  void key(const TrackKey& k, const std::string& where) {
    if (!is_valid(k)) error(where + ": invalid track key '" + k.str() + "'");
  }

  // Strictly increasing frames, non-negative, values in [0,1].
  template <typename Entries, typename Value>
  void entries(const Entries& es, const std::string& where, Value value) {
    for (std::size_t i = 0; i < es.size(); ++i) {
      if (es[i].frame < 0) error(where + ": negative frame " + std::to_string(es[i].frame));
      if (i > 0 && es[i].frame <= es[i - 1].frame)
        error(where + ": frames not strictly increasing at frame " + std::to_string(es[i].frame));
      double v = value(es[i]);
      if (!(v >= 0.0 && v <= 1.0))
        error(where + ": value outside [0,1] at frame " + std::to_string(es[i].frame));
    }
  }

  ValidationReport take() { return std::move(report_); }

 private:
  ValidationReport report_;
};

}  // namespace

ValidationReport validate_dataset(const Dataset& ds) {
  Checker check;

  std::set<TrackKey> visual_keys;
  for (const auto& [source, tracks] : ds.scores) {
    std::set<TrackKey> seen;
    for (const auto& t : tracks) {
      const std::string where = "scores[" + source + "] " + t.key.str();
      check.key(t.key, where);
      if (!seen.insert(t.key).second) check.error(where + ": duplicate track for source");
      check.entries(t.entries, where, [](const ScoreEntry& e) { return e.score; });
      visual_keys.insert(t.key);
    }
  }

  std::map<TrackKey, const QualityTrack*> quality_by_key;
  for (const auto& t : ds.quality) {
    const std::string where = "quality " + t.key.str();
    check.key(t.key, where);
    if (!quality_by_key.emplace(t.key, &t).second) check.error(where + ": duplicate track");
    check.entries(t.entries, where, [](const QualityEntry& e) { return e.quality; });
  }

  std::set<TrackKey> label_keys;
  for (const auto& t : ds.labels) {
    const std::string where = "labels " + t.key.str();
    check.key(t.key, where);
    if (!label_keys.insert(t.key).second) check.error(where + ": duplicate track");
    check.entries(t.entries, where, [](const LabelEntry&) { return 0.0; });
  }

  for (const auto& [key, segs] : group_segments(ds.segments)) {
    for (std::size_t i = 0; i < segs.size(); ++i) {
      const auto& s = segs[i];
      const std::string where = "segment " + key.str() + " [" + std::to_string(s.start_frame) +
                                "," + std::to_string(s.end_frame) + "]";
      check.key(key, where);
      if (s.start_frame < 0) check.error(where + ": negative start_frame");
      if (s.start_frame > s.end_frame) check.error(where + ": start_frame > end_frame");
      if (s.audio_score && !(*s.audio_score >= 0.0 && *s.audio_score <= 1.0))
        check.error(where + ": audio_score outside [0,1]");
      if (i > 0 && s.start_frame <= segs[i - 1].end_frame)
        check.error(where + ": overlaps previous segment ending at " +
                    std::to_string(segs[i - 1].end_frame));
      if (!ds.scores.empty() && !visual_keys.contains(key))
        check.warn(where + ": no score track for this key");
      if (!ds.quality.empty()) {
        auto it = quality_by_key.find(key);
        std::int64_t missing = s.length();
        if (it != quality_by_key.end()) {
          const auto& es = it->second->entries;
          auto lo = std::lower_bound(es.begin(), es.end(), s.start_frame,
                                     [](const QualityEntry& e, Frame f) { return e.frame < f; });
          auto hi = std::upper_bound(es.begin(), es.end(), s.end_frame,
                                     [](Frame f, const QualityEntry& e) { return f < e.frame; });
          missing -= std::max<std::int64_t>(0, hi - lo);
        }
        if (missing > 0)
          check.warn(where + ": " + std::to_string(missing) + " frame(s) lack quality entries");
      }
    }
  }

  return check.take();
}

}  // namespace egosocial
