#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "moodtune/catalog.hpp"
#include "moodtune/live_catalog.hpp"
#include "moodtune/pipeline.hpp"
#include "moodtune/store.hpp"

namespace httplib {
class Server;
}

namespace moodtune::service {

inline constexpr const char* kApiPrefix = "/api/v1";

inline constexpr const char* kEnvAdminToken = "MOODTUNE_ADMIN_TOKEN";
inline constexpr const char* kEnvMode = "MOODTUNE_MODE";
inline constexpr const char* kEnvFixturePath = "MOODTUNE_FIXTURE_PATH";
inline constexpr const char* kEnvBindAddr = "MOODTUNE_BIND_ADDR";
inline constexpr const char* kEnvStorePath = "MOODTUNE_STORE_PATH";
inline constexpr const char* kEnvUiDir = "MOODTUNE_UI_DIR";
inline constexpr const char* kEnvRedirectUri = "MOODTUNE_REDIRECT_URI";

struct ServiceConfig {
  SessionMode mode = SessionMode::Offline;
  std::string admin_token;
  std::filesystem::path fixture_path;
  std::string bind_addr = "127.0.0.1:8080";
  std::filesystem::path store_path = "moodtune.db";
  std::optional<std::filesystem::path> ui_dir;
  std::string redirect_uri = "http://127.0.0.1:8080/api/v1/auth/callback";
  /// When set, each session's random source is derived from this and the
  /// session id, making runs reproducible.
  std::optional<std::uint64_t> base_seed;
  pipeline::PipelineConfig pipeline;

  /// Reads the MOODTUNE_* variables over the defaults above.
  static ServiceConfig from_environment();
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> headers;  // lowercase names
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

/// The experiment flow behind /api/v1.
///
/// Each session carries its own random source and at most one active pair.
/// Operations on one session are serialized by a per-session mutex; the
/// store serializes writes across sessions. Non-admin responses only ever
/// expose blind labels.
class Service {
 public:
  Service(ServiceConfig config, std::shared_ptr<store::ExperimentStore> store,
          std::shared_ptr<catalog::CatalogProvider> offline_provider,
          std::shared_ptr<catalog::LiveCatalog> live_provider = nullptr);

  ApiResponse handle(const ApiRequest& request);

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct SessionState {
    std::mutex mutex;
    store::ExperimentSession session;
    std::optional<std::vector<Track>> cached_top_tracks;
    std::optional<pipeline::RecommendationPair> active_pair;
    std::vector<std::string> rated_labels;
    catalog::UserSession user;
    Rng rng;

    SessionState(store::ExperimentSession s, std::uint64_t seed)
        : session(std::move(s)), rng(seed) {}
  };

  ApiResponse create_session(const ApiRequest& request);
  ApiResponse create_pair(const std::string& session_id, const ApiRequest& request);
  ApiResponse submit_rating(const std::string& session_id, const ApiRequest& request);
  ApiResponse export_ratings(const ApiRequest& request);
  ApiResponse auth_callback(const ApiRequest& request);

  std::shared_ptr<SessionState> session_state(const std::string& session_id);
  std::uint64_t seed_for(const std::string& session_id) const;
  catalog::CatalogProvider* provider_for(SessionMode mode) const;

  ServiceConfig config_;
  std::shared_ptr<store::ExperimentStore> store_;
  std::shared_ptr<catalog::CatalogProvider> offline_provider_;
  std::shared_ptr<catalog::LiveCatalog> live_provider_;

  std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<SessionState>> sessions_;
};

class BindError : public Error {
 public:
  using Error::Error;
};

/// Serves a Service over HTTP with cpp-httplib, plus static UI assets at "/".
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<Service> service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds "host:port"; port 0 picks a free port. Returns the bound port.
  /// Throws BindError.
  int bind(const std::string& bind_addr);

  /// Blocks until stop() is called.
  void run();
  void start();
  void stop();

 private:
  std::shared_ptr<Service> service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

/// Splits "host:port". Throws ValidationError.
std::pair<std::string, int> parse_bind_addr(const std::string& bind_addr);

}  // namespace moodtune::service
