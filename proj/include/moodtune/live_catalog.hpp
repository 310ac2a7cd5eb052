#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "moodtune/catalog.hpp"

namespace moodtune::catalog {

struct HttpResponse {
  int status = 0;  // 0 when the request never produced a response
  std::string body;
  std::map<std::string, std::string> headers;  // lowercase names
};

using HttpHeaders = std::map<std::string, std::string>;

/// Minimal blocking HTTP client seam so the live provider can be exercised
/// against canned responses.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse get(const std::string& url, const HttpHeaders& headers) = 0;
  virtual HttpResponse post_form(const std::string& url, const HttpHeaders& headers,
                                 const std::string& form_body) = 0;
};

/// HTTPS transport backed by cpp-httplib.
std::shared_ptr<HttpTransport> make_default_transport();

struct LiveEndpoints {
  std::string taste_api = "https://api.spotify.com";
  std::string taste_accounts = "https://accounts.spotify.com";
  std::string similarity_api = "https://ws.audioscrobbler.com";
  std::string feature_api = "https://api.reccobeats.com";
};

struct OAuthToken {
  std::string access_token;
  std::string refresh_token;
  int expires_in = 0;
};

/// Provider backed by the three public web APIs: the streaming service for
/// top tracks and search, Last.fm for similarity, and ReccoBeats for audio
/// features.
class LiveCatalog final : public CatalogProvider {
 public:
  LiveCatalog(ProviderCredentials credentials, std::shared_ptr<HttpTransport> transport,
              LiveEndpoints endpoints = {});

  std::vector<Track> fetch_top_tracks(const UserSession& session, TimeRange range,
                                      std::size_t limit) override;
  std::vector<TrackDescriptor> similar_tracks(const Track& seed,
                                              std::size_t limit) override;
  Track resolve_track(const TrackDescriptor& descriptor) override;
  FeatureVector audio_features(Track& track) override;

  /// Login URL the participant is redirected to; `state` comes back on the
  /// callback and identifies the experiment session.
  std::string authorize_url(const std::string& redirect_uri, const std::string& state) const;

  /// Exchanges an authorization code for a user token.
  OAuthToken exchange_code(const std::string& code, const std::string& redirect_uri);

 private:
  // Raises the CatalogError matching a non-2xx status; `what` names the call.
  void check_status(const HttpResponse& response, const std::string& what) const;
  std::string app_token();

  ProviderCredentials credentials_;
  std::shared_ptr<HttpTransport> transport_;
  LiveEndpoints endpoints_;

  std::mutex token_mutex_;
  std::optional<std::string> app_token_;
};

/// Percent-encodes a query component (RFC 3986 unreserved set kept).
std::string url_encode(std::string_view text);

}  // namespace moodtune::catalog
