#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moodtune/errors.hpp"
#include "moodtune/track.hpp"

namespace moodtune::catalog {

enum class ErrorKind {
  AuthExpired,
  ProviderUnavailable,
  RateLimited,
  NotFound,
  UnmappedTrack,
};

std::string_view to_label(ErrorKind kind);

/// Failure reported by a provider call. Messages never carry credentials.
class CatalogError : public Error {
 public:
  CatalogError(ErrorKind kind, std::string message,
               std::optional<std::chrono::milliseconds> retry_after = std::nullopt)
      : Error(std::move(message)), kind_(kind), retry_after_(retry_after) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::optional<std::chrono::milliseconds> retry_after() const noexcept {
    return retry_after_;
  }

  /// Transient failures that fetch_many retries with backoff.
  bool retryable() const noexcept {
    return kind_ == ErrorKind::RateLimited || kind_ == ErrorKind::ProviderUnavailable;
  }

 private:
  ErrorKind kind_;
  std::optional<std::chrono::milliseconds> retry_after_;
};

enum class TimeRange { Short, Medium, Long };

std::string_view to_label(TimeRange range);
TimeRange parse_time_range(std::string_view text);

/// Opaque handle for an authenticated listener. Offline providers ignore it.
struct UserSession {
  std::string access_token;
};

inline constexpr const char* kEnvTasteClientId = "MOODTUNE_TASTE_CLIENT_ID";
inline constexpr const char* kEnvTasteClientSecret = "MOODTUNE_TASTE_CLIENT_SECRET";
inline constexpr const char* kEnvSimilarityApiKey = "MOODTUNE_SIMILARITY_API_KEY";

struct ProviderCredentials {
  std::string taste_client_id;
  std::string taste_client_secret;
  std::string similarity_api_key;

  static ProviderCredentials from_environment();

  /// Names of the environment variables that were unset or empty.
  std::vector<std::string> missing_variables() const;

  /// Replaces every occurrence of a credential value in `text` with "***".
  std::string redact(std::string text) const;
};

/// Limits for a batch of provider calls.
struct FetchPolicy {
  std::size_t max_in_flight = 10;
  double per_provider_rate = 20.0;  // requests per second
  unsigned retry_limit = 3;
  std::chrono::milliseconds backoff_base{500};

  void validate() const;
};

/// The four lookups the recommendation pipeline needs. Implementations must
/// tolerate concurrent calls.
class CatalogProvider {
 public:
  virtual ~CatalogProvider() = default;

  /// Up to `limit` of the listener's top tracks, without features.
  virtual std::vector<Track> fetch_top_tracks(const UserSession& session,
                                              TimeRange range, std::size_t limit) = 0;

  /// Up to `limit` related descriptors for `seed`, never the seed itself.
  /// Throws NotFound when the similarity source does not know the seed.
  virtual std::vector<TrackDescriptor> similar_tracks(const Track& seed,
                                                      std::size_t limit) = 0;

  /// Reconciles a descriptor to a canonical track: the first search hit whose
  /// artist matches case-insensitively.
  virtual Track resolve_track(const TrackDescriptor& descriptor) = 0;

  /// Two-step feature lookup (canonical id -> feature id -> features). Both
  /// results are written back into `track`. Throws UnmappedTrack when the
  /// first step fails.
  virtual FeatureVector audio_features(Track& track) = 0;
};

/// Drops descriptors equal to the seed's (artist, title) ignoring case, then
/// truncates to `limit`.
std::vector<TrackDescriptor> exclude_seed(std::vector<TrackDescriptor> related,
                                          const Track& seed, std::size_t limit);

}  // namespace moodtune::catalog
