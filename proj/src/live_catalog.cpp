#include "moodtune/live_catalog.hpp"

#include <cctype>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace moodtune::catalog {

using nlohmann::json;

namespace {

std::string spotify_range(TimeRange range) {
  return std::string(to_label(range)) + "_term";
}

json parse_body(const HttpResponse& response, const std::string& what) {
  try {
    return json::parse(response.body);
  } catch (const json::parse_error&) {
    throw CatalogError(ErrorKind::ProviderUnavailable, what + ": malformed response body");
  }
}

std::string first_artist(const json& item) {
  if (item.contains("artists") && item["artists"].is_array() && !item["artists"].empty()) {
    return item["artists"][0].value("name", "");
  }
  return "";
}

Track track_from_item(const json& item) {
  Track t;
  t.canonical_id = item.value("id", "");
  t.title = item.value("name", "");
  t.artist = first_artist(item);
  return t;
}

class HttplibTransport final : public HttpTransport {
 public:
  HttpResponse get(const std::string& url, const HttpHeaders& headers) override {
    auto [origin, path] = split(url);
    httplib::Client client(origin);
    client.set_connection_timeout(5);
    client.set_read_timeout(15);
    return convert(client.Get(path, to_httplib(headers)));
  }

  HttpResponse post_form(const std::string& url, const HttpHeaders& headers,
                         const std::string& form_body) override {
    auto [origin, path] = split(url);
    httplib::Client client(origin);
    client.set_connection_timeout(5);
    client.set_read_timeout(15);
    return convert(client.Post(path, to_httplib(headers), form_body,
                               "application/x-www-form-urlencoded"));
  }

 private:
  static std::pair<std::string, std::string> split(const std::string& url) {
    const std::size_t scheme_end = url.find("://");
    const std::size_t path_start =
        url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
  }

  static httplib::Headers to_httplib(const HttpHeaders& headers) {
    return {headers.begin(), headers.end()};
  }

  static HttpResponse convert(const httplib::Result& result) {
    HttpResponse out;
    if (!result) return out;
    out.status = result->status;
    out.body = result->body;
    for (const auto& [name, value] : result->headers) {
      std::string lowered = name;
      for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      out.headers[lowered] = value;
    }
    return out;
  }
};

}  // namespace

std::shared_ptr<HttpTransport> make_default_transport() {
  return std::make_shared<HttplibTransport>();
}

std::string url_encode(std::string_view text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xF]);
    }
  }
  return out;
}

LiveCatalog::LiveCatalog(ProviderCredentials credentials,
                         std::shared_ptr<HttpTransport> transport, LiveEndpoints endpoints)
    : credentials_(std::move(credentials)),
      transport_(std::move(transport)),
      endpoints_(std::move(endpoints)) {}

void LiveCatalog::check_status(const HttpResponse& response, const std::string& what) const {
  const int status = response.status;
  if (status >= 200 && status < 300) return;
  const std::string context = credentials_.redact(what);
  if (status == 401) {
    throw CatalogError(ErrorKind::AuthExpired, context + ": authorization expired or revoked");
  }
  if (status == 429) {
    std::optional<std::chrono::milliseconds> retry_after;
    auto it = response.headers.find("retry-after");
    if (it != response.headers.end()) {
      try {
        retry_after = std::chrono::seconds(std::stol(it->second));
      } catch (const std::exception&) {
      }
    }
    throw CatalogError(ErrorKind::RateLimited, context + ": rate limited", retry_after);
  }
  if (status == 404) throw CatalogError(ErrorKind::NotFound, context + ": not found");
  if (status == 0) {
    throw CatalogError(ErrorKind::ProviderUnavailable, context + ": no response");
  }
  throw CatalogError(ErrorKind::ProviderUnavailable,
                     context + ": HTTP status " + std::to_string(status));
}

std::string LiveCatalog::app_token() {
  std::lock_guard lock(token_mutex_);
  if (app_token_) return *app_token_;
  auto [name, value] = httplib::make_basic_authentication_header(
      credentials_.taste_client_id, credentials_.taste_client_secret);
  const HttpResponse response =
      transport_->post_form(endpoints_.taste_accounts + "/api/token", {{name, value}},
                            "grant_type=client_credentials");
  check_status(response, "client token request");
  const json body = parse_body(response, "client token request");
  app_token_ = body.value("access_token", "");
  if (app_token_->empty()) {
    app_token_.reset();
    throw CatalogError(ErrorKind::AuthExpired, "client token request: no token issued");
  }
  return *app_token_;
}

std::vector<Track> LiveCatalog::fetch_top_tracks(const UserSession& session,
                                                 TimeRange range, std::size_t limit) {
  if (limit == 0) return {};
  if (session.access_token.empty()) {
    throw CatalogError(ErrorKind::AuthExpired, "top tracks: no user token");
  }
  const std::string url = endpoints_.taste_api + "/v1/me/top/tracks?time_range=" +
                          spotify_range(range) + "&limit=" + std::to_string(std::min<std::size_t>(limit, 50));
  const HttpResponse response =
      transport_->get(url, {{"Authorization", "Bearer " + session.access_token}});
  check_status(response, "top tracks");
  const json body = parse_body(response, "top tracks");
  std::vector<Track> out;
  for (const json& item : body.value("items", json::array())) {
    if (out.size() >= limit) break;
    Track t = track_from_item(item);
    if (!t.canonical_id.empty()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<TrackDescriptor> LiveCatalog::similar_tracks(const Track& seed,
                                                         std::size_t limit) {
  // Over-fetch by one so dropping the seed itself still leaves `limit`.
  const std::string url = endpoints_.similarity_api +
                          "/2.0/?method=track.getsimilar&format=json&autocorrect=1&artist=" +
                          url_encode(seed.artist) + "&track=" + url_encode(seed.title) +
                          "&limit=" + std::to_string(limit + 1) +
                          "&api_key=" + url_encode(credentials_.similarity_api_key);
  const HttpResponse response = transport_->get(url, {});
  check_status(response, "similar tracks");
  const json body = parse_body(response, "similar tracks");
  if (body.contains("error")) {
    const int code = body["error"].is_number() ? body["error"].get<int>() : 0;
    if (code == 6) {
      throw CatalogError(ErrorKind::NotFound, "similar tracks: seed unknown to similarity source");
    }
    if (code == 29) throw CatalogError(ErrorKind::RateLimited, "similar tracks: rate limited");
    if (code == 10 || code == 26) {
      throw CatalogError(ErrorKind::AuthExpired, "similar tracks: API key rejected");
    }
    throw CatalogError(ErrorKind::ProviderUnavailable,
                       "similar tracks: provider error " + std::to_string(code));
  }
  std::vector<TrackDescriptor> related;
  const json list = body.value("similartracks", json::object()).value("track", json::array());
  for (const json& item : list) {
    std::string artist;
    if (item.contains("artist") && item["artist"].is_object()) {
      artist = item["artist"].value("name", "");
    }
    std::string title = item.value("name", "");
    if (!artist.empty() && !title.empty()) related.push_back({artist, title});
  }
  return exclude_seed(std::move(related), seed, limit);
}

Track LiveCatalog::resolve_track(const TrackDescriptor& descriptor) {
  if (descriptor.artist.empty() || descriptor.title.empty()) {
    throw ValidationError("descriptor needs both artist and title");
  }
  const std::string query = "track:" + descriptor.title + " artist:" + descriptor.artist;
  const std::string url =
      endpoints_.taste_api + "/v1/search?type=track&limit=10&q=" + url_encode(query);
  const HttpResponse response =
      transport_->get(url, {{"Authorization", "Bearer " + app_token()}});
  if (response.status == 401) {
    std::lock_guard lock(token_mutex_);
    app_token_.reset();
  }
  check_status(response, "track search");
  const json body = parse_body(response, "track search");
  const json items = body.value("tracks", json::object()).value("items", json::array());
  std::size_t skipped = 0;
  for (const json& item : items) {
    Track t = track_from_item(item);
    if (t.canonical_id.empty() || !iequals(t.artist, descriptor.artist)) {
      ++skipped;
      continue;
    }
    if (skipped) {
      spdlog::debug("search for '{}' skipped {} hit(s) with a different artist",
                    descriptor.title, skipped);
    }
    t.similarity_source_key = descriptor;
    return t;
  }
  throw CatalogError(ErrorKind::NotFound, "track search: no artist-matching hit for '" +
                                              descriptor.artist + " - " + descriptor.title + "'");
}

FeatureVector LiveCatalog::audio_features(Track& track) {
  if (track.canonical_id.empty()) throw ValidationError("track has no canonical id");

  const HttpResponse mapping = transport_->get(
      endpoints_.feature_api + "/v1/track?ids=" + url_encode(track.canonical_id), {});
  if (mapping.status == 404) {
    throw CatalogError(ErrorKind::UnmappedTrack, "feature lookup: track not in feature source");
  }
  check_status(mapping, "feature id lookup");
  const json mapped = parse_body(mapping, "feature id lookup");
  const json content = mapped.value("content", json::array());
  if (content.empty() || !content[0].contains("id")) {
    throw CatalogError(ErrorKind::UnmappedTrack, "feature lookup: track not in feature source");
  }
  track.feature_source_id = content[0]["id"].get<std::string>();

  const HttpResponse features = transport_->get(
      endpoints_.feature_api + "/v1/track/" + url_encode(*track.feature_source_id) +
          "/audio-features",
      {});
  if (features.status == 404) {
    throw CatalogError(ErrorKind::UnmappedTrack, "feature lookup: no audio features");
  }
  check_status(features, "audio features");
  const json body = parse_body(features, "audio features");
  if (!body.contains("valence") || !body.contains("energy") ||
      !body["valence"].is_number() || !body["energy"].is_number()) {
    throw CatalogError(ErrorKind::UnmappedTrack, "feature lookup: features incomplete");
  }
  try {
    track.features.emplace(body["valence"].get<double>(), body["energy"].get<double>());
  } catch (const ValidationError& e) {
    throw CatalogError(ErrorKind::UnmappedTrack,
                       std::string("feature lookup: ") + e.what());
  }
  return *track.features;
}

std::string LiveCatalog::authorize_url(const std::string& redirect_uri,
                                       const std::string& state) const {
  return endpoints_.taste_accounts + "/authorize?response_type=code&client_id=" +
         url_encode(credentials_.taste_client_id) + "&scope=user-top-read&redirect_uri=" +
         url_encode(redirect_uri) + "&state=" + url_encode(state);
}

OAuthToken LiveCatalog::exchange_code(const std::string& code,
                                      const std::string& redirect_uri) {
  auto [name, value] = httplib::make_basic_authentication_header(
      credentials_.taste_client_id, credentials_.taste_client_secret);
  const HttpResponse response = transport_->post_form(
      endpoints_.taste_accounts + "/api/token", {{name, value}},
      "grant_type=authorization_code&code=" + url_encode(code) +
          "&redirect_uri=" + url_encode(redirect_uri));
  if (response.status == 400) {
    throw CatalogError(ErrorKind::AuthExpired, "code exchange: authorization code rejected");
  }
  check_status(response, "code exchange");
  const json body = parse_body(response, "code exchange");
  OAuthToken token;
  token.access_token = body.value("access_token", "");
  token.refresh_token = body.value("refresh_token", "");
  token.expires_in = body.value("expires_in", 0);
  if (token.access_token.empty()) {
    throw CatalogError(ErrorKind::AuthExpired, "code exchange: no token issued");
  }
  return token;
}

}  // namespace moodtune::catalog
