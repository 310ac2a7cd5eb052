#include "moodtune/catalog.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace moodtune {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

}  // namespace moodtune

namespace moodtune::catalog {

std::string_view to_label(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::AuthExpired: return "auth_expired";
    case ErrorKind::ProviderUnavailable: return "provider_unavailable";
    case ErrorKind::RateLimited: return "rate_limited";
    case ErrorKind::NotFound: return "not_found";
    case ErrorKind::UnmappedTrack: return "unmapped_track";
  }
  return "unknown";
}

std::string_view to_label(TimeRange range) {
  switch (range) {
    case TimeRange::Short: return "short";
    case TimeRange::Medium: return "medium";
    case TimeRange::Long: return "long";
  }
  return "medium";
}

TimeRange parse_time_range(std::string_view text) {
  if (text == "short") return TimeRange::Short;
  if (text == "medium") return TimeRange::Medium;
  if (text == "long") return TimeRange::Long;
  throw ValidationError("time range must be short, medium or long");
}

namespace {

std::string env_or_empty(const char* name) {
  const char* value = std::getenv(name);
  return value ? value : "";
}

}  // namespace

ProviderCredentials ProviderCredentials::from_environment() {
  return {env_or_empty(kEnvTasteClientId), env_or_empty(kEnvTasteClientSecret),
          env_or_empty(kEnvSimilarityApiKey)};
}

std::vector<std::string> ProviderCredentials::missing_variables() const {
  std::vector<std::string> missing;
  if (taste_client_id.empty()) missing.emplace_back(kEnvTasteClientId);
  if (taste_client_secret.empty()) missing.emplace_back(kEnvTasteClientSecret);
  if (similarity_api_key.empty()) missing.emplace_back(kEnvSimilarityApiKey);
  return missing;
}

std::string ProviderCredentials::redact(std::string text) const {
  for (const std::string* secret :
       {&taste_client_id, &taste_client_secret, &similarity_api_key}) {
    if (secret->empty()) continue;
    for (std::size_t pos = text.find(*secret); pos != std::string::npos;
         pos = text.find(*secret, pos + 3)) {
      text.replace(pos, secret->size(), "***");
    }
  }
  return text;
}

void FetchPolicy::validate() const {
  if (max_in_flight < 1) throw ValidationError("max_in_flight must be at least 1");
  if (!(per_provider_rate > 0.0)) {
    throw ValidationError("per_provider_rate must be positive");
  }
  if (backoff_base.count() < 0) throw ValidationError("backoff_base must be >= 0");
}

std::vector<TrackDescriptor> exclude_seed(std::vector<TrackDescriptor> related,
                                          const Track& seed, std::size_t limit) {
  std::erase_if(related, [&](const TrackDescriptor& d) {
    return iequals(d.artist, seed.artist) && iequals(d.title, seed.title);
  });
  if (related.size() > limit) related.resize(limit);
  return related;
}

}  // namespace moodtune::catalog
