#include "moodtune/service.hpp"

#include <cstdlib>
#include <functional>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace moodtune::service {

using nlohmann::json;

namespace {

ApiResponse json_response(int status, const json& body) {
  ApiResponse r;
  r.status = status;
  r.body = body.dump();
  return r;
}

ApiResponse error_response(int status, std::string code, std::string message,
                           bool retryable = false) {
  return json_response(status, {{"error",
                                 {{"code", std::move(code)},
                                  {"message", std::move(message)},
                                  {"retryable", retryable}}}});
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t end = path.find('/', start);
    const std::string_view part =
        path.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    if (!part.empty()) parts.emplace_back(part);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

std::optional<json> parse_body(const ApiRequest& request) {
  if (request.body.empty()) return json::object();
  try {
    json body = json::parse(request.body);
    if (body.is_object()) return body;
  } catch (const json::parse_error&) {
  }
  return std::nullopt;
}

std::string env_or(const char* name, std::string fallback) {
  const char* value = std::getenv(name);
  return value && *value ? value : fallback;
}

}  // namespace

ServiceConfig ServiceConfig::from_environment() {
  ServiceConfig config;
  config.mode = parse_session_mode(env_or(kEnvMode, "offline"));
  config.admin_token = env_or(kEnvAdminToken, "");
  config.fixture_path = env_or(kEnvFixturePath, "");
  config.bind_addr = env_or(kEnvBindAddr, config.bind_addr);
  config.store_path = env_or(kEnvStorePath, config.store_path.string());
  if (const std::string ui = env_or(kEnvUiDir, ""); !ui.empty()) config.ui_dir = ui;
  config.redirect_uri = env_or(kEnvRedirectUri, config.redirect_uri);
  return config;
}

std::pair<std::string, int> parse_bind_addr(const std::string& bind_addr) {
  const std::size_t colon = bind_addr.rfind(':');
  if (colon == std::string::npos || colon == 0) {
    throw ValidationError("bind address must look like host:port, got '" + bind_addr + "'");
  }
  int port = -1;
  try {
    std::size_t used = 0;
    port = std::stoi(bind_addr.substr(colon + 1), &used);
    if (used != bind_addr.size() - colon - 1) port = -1;
  } catch (const std::exception&) {
  }
  if (port < 0 || port > 65535) {
    throw ValidationError("invalid port in bind address '" + bind_addr + "'");
  }
  return {bind_addr.substr(0, colon), port};
}

Service::Service(ServiceConfig config, std::shared_ptr<store::ExperimentStore> store,
                 std::shared_ptr<catalog::CatalogProvider> offline_provider,
                 std::shared_ptr<catalog::LiveCatalog> live_provider)
    : config_(std::move(config)),
      store_(std::move(store)),
      offline_provider_(std::move(offline_provider)),
      live_provider_(std::move(live_provider)) {
  config_.pipeline.validate();
}

std::uint64_t Service::seed_for(const std::string& session_id) const {
  if (!config_.base_seed) {
    std::random_device device;
    return (static_cast<std::uint64_t>(device()) << 32) ^ device();
  }
  // FNV-1a, fixed across standard libraries unlike std::hash.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : session_id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return *config_.base_seed ^ h;
}

catalog::CatalogProvider* Service::provider_for(SessionMode mode) const {
  if (mode == SessionMode::Live) return live_provider_.get();
  return offline_provider_.get();
}

std::shared_ptr<Service::SessionState> Service::session_state(const std::string& session_id) {
  std::lock_guard lock(sessions_mutex_);
  if (auto it = sessions_.find(session_id); it != sessions_.end()) return it->second;
  // Sessions outlive the process in the store; rebuild in-memory state.
  std::optional<store::ExperimentSession> stored = store_->find_session(session_id);
  if (!stored) return nullptr;
  auto state = std::make_shared<SessionState>(*stored, seed_for(session_id));
  sessions_.emplace(session_id, state);
  return state;
}

ApiResponse Service::handle(const ApiRequest& request) {
  const std::vector<std::string> parts = split_path(request.path);
  // Expect ["api", "v1", ...].
  if (parts.size() < 3 || parts[0] != "api" || parts[1] != "v1") {
    return error_response(404, "not_found", "no such endpoint");
  }
  const std::string& method = request.method;
  try {
    if (parts.size() == 3 && parts[2] == "health" && method == "GET") {
      return json_response(200, {{"status", "ok"}, {"mode", to_label(config_.mode)}});
    }
    if (parts.size() == 3 && parts[2] == "session" && method == "POST") {
      return create_session(request);
    }
    if (parts.size() == 5 && parts[2] == "session" && method == "POST") {
      if (parts[4] == "pair") return create_pair(parts[3], request);
      if (parts[4] == "rating") return submit_rating(parts[3], request);
    }
    if (parts.size() == 4 && parts[2] == "admin" && parts[3] == "export" && method == "GET") {
      return export_ratings(request);
    }
    if (parts.size() == 4 && parts[2] == "auth" && parts[3] == "callback" && method == "GET") {
      return auth_callback(request);
    }
  } catch (const std::exception& e) {
    spdlog::error("request {} {} failed: {}", method, request.path, e.what());
    return error_response(500, "internal", "internal error");
  }
  return error_response(404, "not_found", "no such endpoint");
}

ApiResponse Service::create_session(const ApiRequest& request) {
  const std::optional<json> body = parse_body(request);
  if (!body) return error_response(400, "bad_request", "body must be a JSON object");
  const json pseudonym = body->value("participant_pseudonym", json());
  if (!pseudonym.is_string() || pseudonym.get<std::string>().empty()) {
    return error_response(400, "validation", "participant_pseudonym is required");
  }
  SessionMode mode = config_.mode;
  if (body->contains("mode")) {
    try {
      mode = parse_session_mode((*body)["mode"].get<std::string>());
    } catch (const std::exception&) {
      return error_response(400, "validation", "mode must be 'live' or 'offline'");
    }
  }
  if (!provider_for(mode)) {
    return error_response(400, "validation",
                          std::string(to_label(mode)) + " mode is not configured on this server");
  }

  store::ExperimentSession session = store_->create_session(pseudonym.get<std::string>(), mode);
  {
    std::lock_guard lock(sessions_mutex_);
    sessions_.emplace(session.session_id,
                      std::make_shared<SessionState>(session, seed_for(session.session_id)));
  }
  json out = {{"session_id", session.session_id}, {"mode", to_label(mode)}};
  if (mode == SessionMode::Live) {
    out["auth_redirect"] = live_provider_->authorize_url(config_.redirect_uri, session.session_id);
  }
  return json_response(201, out);
}

ApiResponse Service::create_pair(const std::string& session_id, const ApiRequest& request) {
  std::shared_ptr<SessionState> state = session_state(session_id);
  if (!state) return error_response(404, "unknown_session", "unknown session");
  const std::optional<json> body = parse_body(request);
  if (!body) return error_response(400, "bad_request", "body must be a JSON object");
  const json mood_field = body->value("mood", json());
  if (!mood_field.is_string()) return error_response(422, "unknown_mood", "mood is required");
  MoodCategory mood;
  try {
    mood = parse_mood(mood_field.get<std::string>());
  } catch (const UnknownMoodError& e) {
    return error_response(422, "unknown_mood", e.what());
  }

  std::lock_guard lock(state->mutex);
  if (state->active_pair) {
    return error_response(409, "pair_pending", "rate the current pair before requesting another");
  }
  catalog::CatalogProvider* provider = provider_for(state->session.mode);
  pipeline::PipelineConfig config = config_.pipeline;
  if (state->session.mode == SessionMode::Offline) {
    // Local fixture lookups need no throttling.
    config.fetch.per_provider_rate = 1e6;
  }

  try {
    if (!state->cached_top_tracks) {
      state->cached_top_tracks =
          provider->fetch_top_tracks(state->user, config.time_range, config.top_track_limit);
    }
    const std::vector<Track> seeds =
        pipeline::select_seeds(*state->cached_top_tracks, config.n_seeds, state->rng);
    const pipeline::CandidatePool pool =
        pipeline::build_candidate_pool(seeds, *provider, config);
    pipeline::RecommendationPair pair =
        pipeline::generate_pair(pool, mood, config, state->rng);
    store_->record_pair(session_id, pair);

    json items = json::array();
    for (const pipeline::BlindLabel& b : pair.blind_labels) {
      const Track& t = pair.track_for(b.arm);
      items.push_back({{"label", b.label}, {"title", t.title}, {"artist", t.artist}});
    }
    json out = {{"pair_id", pair.pair_id}, {"mood", to_label(mood)}, {"items", items}};
    state->active_pair = std::move(pair);
    state->rated_labels.clear();
    return json_response(201, out);
  } catch (const catalog::CatalogError& e) {
    if (e.kind() == catalog::ErrorKind::AuthExpired) {
      state->cached_top_tracks.reset();
      return error_response(401, "auth_expired", "please log in again", false);
    }
    spdlog::warn("provider failure for session {}: {}", session_id, e.what());
    return error_response(503, "provider_unavailable",
                          "a music data provider is unavailable, try again", true);
  } catch (const pipeline::PoolTooSmallError& e) {
    return error_response(502, "pool_too_small", e.what(), true);
  } catch (const pipeline::EmptyTasteError& e) {
    return error_response(502, "empty_taste", e.what(), false);
  }
}

ApiResponse Service::submit_rating(const std::string& session_id, const ApiRequest& request) {
  std::shared_ptr<SessionState> state = session_state(session_id);
  if (!state) return error_response(404, "unknown_session", "unknown session");
  const std::optional<json> body = parse_body(request);
  if (!body) return error_response(400, "bad_request", "body must be a JSON object");

  const json pair_id = body->value("pair_id", json());
  const json label = body->value("label", json());
  const json rating = body->value("rating", json());
  const json comment = body->value("comment", json());
  if (!pair_id.is_string()) return error_response(422, "validation", "pair_id is required");
  if (!label.is_string() || (label != "A" && label != "B")) {
    return error_response(422, "validation", "label must be \"A\" or \"B\"");
  }
  if (!rating.is_number_integer() || rating.get<int>() < 1 || rating.get<int>() > 5) {
    return error_response(422, "rating_out_of_range", "rating must be an integer from 1 to 5");
  }
  if (!comment.is_null() && !comment.is_string()) {
    return error_response(422, "validation", "comment must be text");
  }

  std::lock_guard lock(state->mutex);
  const std::string pid = pair_id.get<std::string>();
  const std::string lbl = label.get<std::string>();
  std::optional<store::StoredPair> stored = store_->find_pair(pid);
  if (!stored || stored->session_id != session_id) {
    return error_response(404, "unknown_pair", "unknown pair for this session");
  }

  RatingRecord record;
  record.pair_id = pid;
  record.arm = stored->arm_for(lbl);
  record.rating = rating.get<int>();
  record.mood = stored->mood;
  if (comment.is_string()) record.comment = comment.get<std::string>();
  record.rated_at = utc_now_iso8601();
  try {
    store_->record_rating(session_id, record);
  } catch (const store::StoreError& e) {
    switch (e.code()) {
      case store::StoreErrc::DuplicateRating:
        return error_response(409, "duplicate_rating", "this item was already rated");
      case store::StoreErrc::OutOfRange:
        return error_response(422, "rating_out_of_range", "rating must be from 1 to 5");
      case store::StoreErrc::UnknownSession:
      case store::StoreErrc::UnknownPair:
        return error_response(404, "unknown_pair", "unknown pair for this session");
      default:
        throw;
    }
  }

  bool closed = false;
  if (state->active_pair && state->active_pair->pair_id == pid) {
    state->rated_labels.push_back(lbl);
    if (state->rated_labels.size() >= 2) {
      state->active_pair.reset();
      state->rated_labels.clear();
      closed = true;
    }
  }
  return json_response(201, {{"status", "stored"},
                             {"pair_id", pid},
                             {"label", lbl},
                             {"pair_closed", closed}});
}

ApiResponse Service::export_ratings(const ApiRequest& request) {
  std::string presented;
  if (auto it = request.headers.find("authorization"); it != request.headers.end()) {
    static constexpr std::string_view kBearer = "Bearer ";
    if (it->second.starts_with(kBearer)) presented = it->second.substr(kBearer.size());
  } else if (auto it2 = request.headers.find("x-admin-token"); it2 != request.headers.end()) {
    presented = it2->second;
  }
  if (config_.admin_token.empty() || presented != config_.admin_token) {
    return error_response(401, "unauthorized", "admin token required");
  }

  store::ExportFilter filter;
  try {
    if (auto it = request.query.find("session_id"); it != request.query.end()) {
      filter.session_id = it->second;
    }
    if (auto it = request.query.find("mood"); it != request.query.end()) {
      filter.mood = parse_mood(it->second);
    }
    if (auto it = request.query.find("from"); it != request.query.end()) {
      filter.rated_from = it->second;
    }
    if (auto it = request.query.find("to"); it != request.query.end()) filter.rated_to = it->second;
  } catch (const UnknownMoodError& e) {
    return error_response(422, "unknown_mood", e.what());
  }

  ApiResponse r;
  r.status = 200;
  r.content_type = "text/csv; charset=utf-8";
  r.body = store::to_csv(store_->export_rows(filter));
  return r;
}

ApiResponse Service::auth_callback(const ApiRequest& request) {
  auto code = request.query.find("code");
  auto state_id = request.query.find("state");
  if (code == request.query.end() || state_id == request.query.end()) {
    return error_response(400, "validation", "code and state are required");
  }
  std::shared_ptr<SessionState> state = session_state(state_id->second);
  if (!state || state->session.mode != SessionMode::Live || !live_provider_) {
    return error_response(404, "unknown_session", "unknown session");
  }
  try {
    const catalog::OAuthToken token =
        live_provider_->exchange_code(code->second, config_.redirect_uri);
    std::lock_guard lock(state->mutex);
    state->user.access_token = token.access_token;
    state->cached_top_tracks.reset();
  } catch (const catalog::CatalogError& e) {
    if (e.kind() == catalog::ErrorKind::AuthExpired) {
      return error_response(401, "auth_expired", "login was not completed");
    }
    return error_response(503, "provider_unavailable", "login service unavailable", true);
  }
  ApiResponse r;
  r.status = 302;
  r.headers["Location"] = "/";
  r.body = json({{"status", "authenticated"}}).dump();
  return r;
}

HttpServer::HttpServer(std::shared_ptr<Service> service)
    : service_(std::move(service)), server_(std::make_unique<httplib::Server>()) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest request;
    request.method = req.method;
    request.path = req.path;
    request.body = req.body;
    for (const auto& [name, value] : req.headers) {
      std::string lowered = name;
      for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      request.headers[lowered] = value;
    }
    for (const auto& [name, value] : req.params) request.query[name] = value;
    const ApiResponse response = service_->handle(request);
    res.status = response.status;
    for (const auto& [name, value] : response.headers) res.set_header(name, value);
    res.set_content(response.body, response.content_type);
  };
  // httplib's defaults set SO_REUSEPORT, which lets a second server share an
  // occupied port instead of failing to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  server_->Get("/api/v1/.*", forward);
  server_->Post("/api/v1/.*", forward);
  if (service_->config().ui_dir) {
    server_->set_mount_point("/", service_->config().ui_dir->string());
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& bind_addr) {
  const auto [host, port] = parse_bind_addr(bind_addr);
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw BindError("cannot bind to " + host + ":0");
    return bound;
  }
  if (!server_->bind_to_port(host, port)) throw BindError("cannot bind to " + bind_addr);
  return port;
}

void HttpServer::run() { server_->listen_after_bind(); }

void HttpServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace moodtune::service
