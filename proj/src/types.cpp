#include "egosocial/types.hpp"

#include <algorithm>

namespace egosocial {

bool is_valid_identifier(const std::string& id) {
  return !id.empty() && id.find_first_of("\n\r\t,") == std::string::npos;
}

bool is_valid(const TrackKey& key) {
  return is_valid_identifier(key.clip_id) && is_valid_identifier(key.person_id);
}

namespace {

template <typename Track>
const Track* find_by_key(const std::vector<Track>& tracks, const TrackKey& key) {
  auto it = std::find_if(tracks.begin(), tracks.end(),
                         [&](const Track& t) { return t.key == key; });
  return it == tracks.end() ? nullptr : &*it;
}

}  // namespace

const FrameScoreTrack* find_track(const std::vector<FrameScoreTrack>& tracks,
                                  const TrackKey& key) {
  return find_by_key(tracks, key);
}

const QualityTrack* find_track(const std::vector<QualityTrack>& tracks, const TrackKey& key) {
  return find_by_key(tracks, key);
}

const FrameLabelTrack* find_track(const std::vector<FrameLabelTrack>& tracks,
                                  const TrackKey& key) {
  return find_by_key(tracks, key);
}

std::map<TrackKey, std::vector<UtteranceSegment>> group_segments(
    const std::vector<UtteranceSegment>& segments) {
  std::map<TrackKey, std::vector<UtteranceSegment>> groups;
  for (const auto& s : segments) groups[s.key].push_back(s);
  for (auto& [key, segs] : groups) {
    std::stable_sort(segs.begin(), segs.end(),
                     [](const UtteranceSegment& a, const UtteranceSegment& b) {
                       return a.start_frame < b.start_frame;
                     });
  }
  return groups;
}

}  // namespace egosocial
