#include "moodtune/experiment.hpp"

#include <chrono>
#include <ctime>

#include "moodtune/errors.hpp"

namespace moodtune {

std::string_view to_label(Arm arm) {
  return arm == Arm::Control ? "control" : "treatment";
}

Arm parse_arm(std::string_view text) {
  if (text == "control") return Arm::Control;
  if (text == "treatment") return Arm::Treatment;
  throw ValidationError("unknown arm: '" + std::string(text) + "'");
}

std::string_view to_label(SessionMode mode) {
  return mode == SessionMode::Live ? "live" : "offline";
}

SessionMode parse_session_mode(std::string_view text) {
  if (text == "live") return SessionMode::Live;
  if (text == "offline") return SessionMode::Offline;
  throw ValidationError("mode must be 'live' or 'offline', got '" +
                        std::string(text) + "'");
}

std::string utc_now_iso8601() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace moodtune
