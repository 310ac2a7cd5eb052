#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "moodtune/mood.hpp"

namespace moodtune {

enum class Arm { Control, Treatment };

std::string_view to_label(Arm arm);
Arm parse_arm(std::string_view text);

enum class SessionMode { Live, Offline };

std::string_view to_label(SessionMode mode);
SessionMode parse_session_mode(std::string_view text);

/// One participant rating of one arm of a pair.
struct RatingRecord {
  std::string pair_id;
  Arm arm = Arm::Control;
  int rating = 0;
  MoodCategory mood = MoodCategory::Neutral;
  std::optional<std::string> comment;
  std::string rated_at;  // ISO-8601 UTC, e.g. 2026-10-16T09:30:00Z
};

/// One row of the ratings export.
struct ExportRow {
  std::string session_id;
  std::string pair_id;
  Arm arm = Arm::Control;
  MoodCategory mood = MoodCategory::Neutral;
  int rating = 0;
  std::optional<std::string> comment{};
  std::string rated_at{};
  bool pair_complete = false;

  friend bool operator==(const ExportRow&, const ExportRow&) = default;
};

/// Current UTC time as ISO-8601 with a trailing Z, second resolution.
std::string utc_now_iso8601();

}  // namespace moodtune
