// moodtune: operator entry points for the mood-assisted recommendation
// platform.
//
//   moodtune serve    --mode offline --fixture data/fixtures/catalog.json
//   moodtune ingest   --fixture data/fixtures/reference_tracks.json
//   moodtune simulate --fixture data/fixtures/catalog.json --mood relaxed --trials 10000
//   moodtune analyze  --export data/exports/study_ratings.csv --format machine

#include <csignal>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "moodtune/commands.hpp"
#include "moodtune/service.hpp"
#include "moodtune/store.hpp"

using namespace moodtune;
using commands::ExitCode;

namespace {

int fail(int code, const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return code;
}

int run_serve(const std::string& mode_flag, const std::string& fixture_flag,
              const std::string& bind_flag, const std::string& store_flag,
              std::optional<std::uint64_t> seed) {
  service::ServiceConfig config;
  try {
    config = service::ServiceConfig::from_environment();
    if (!mode_flag.empty()) config.mode = parse_session_mode(mode_flag);
  } catch (const ValidationError& e) {
    return fail(commands::kExitValidation, e.what());
  }
  if (!fixture_flag.empty()) config.fixture_path = fixture_flag;
  if (!bind_flag.empty()) config.bind_addr = bind_flag;
  if (!store_flag.empty()) config.store_path = store_flag;
  config.base_seed = seed;

  std::shared_ptr<catalog::CatalogProvider> offline;
  std::shared_ptr<catalog::LiveCatalog> live;
  if (config.mode == SessionMode::Live) {
    const auto credentials = catalog::ProviderCredentials::from_environment();
    const auto missing = credentials.missing_variables();
    if (!missing.empty()) {
      return fail(commands::kExitValidation,
                  "live mode requires environment variable " + missing.front());
    }
    live = std::make_shared<catalog::LiveCatalog>(credentials, catalog::make_default_transport());
  }
  if (!config.fixture_path.empty()) {
    try {
      offline = catalog::load_fixture_catalog(config.fixture_path);
    } catch (const catalog::FixtureIoError& e) {
      return fail(commands::kExitIo, e.what());
    } catch (const Error& e) {
      return fail(commands::kExitValidation, e.what());
    }
  } else if (config.mode == SessionMode::Offline) {
    return fail(commands::kExitValidation,
                std::string("offline mode requires --fixture or ") + service::kEnvFixturePath);
  }

  try {
    auto store = std::make_shared<store::ExperimentStore>(config.store_path);
    auto svc = std::make_shared<service::Service>(config, store, offline, live);
    service::HttpServer server(svc);
    const int port = server.bind(config.bind_addr);
    const auto [host, requested] = service::parse_bind_addr(config.bind_addr);

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);
    server.start();
    std::cout << "listening on " << host << ":" << port << " (" << to_label(config.mode)
              << " mode)" << std::endl;
    int received = 0;
    sigwait(&signals, &received);
    spdlog::info("shutting down");
    server.stop();
  } catch (const service::BindError& e) {
    return fail(commands::kExitIo, e.what());
  } catch (const store::StoreError& e) {
    return fail(commands::kExitIo, e.what());
  } catch (const ValidationError& e) {
    return fail(commands::kExitValidation, e.what());
  }
  return commands::kExitOk;
}

int run_ingest(const std::string& path, commands::OutputFormat format) {
  try {
    const commands::IngestReport report = commands::ingest(path);
    std::cout << commands::render(report, format);
    return report.violations.empty() ? commands::kExitOk : commands::kExitValidation;
  } catch (const catalog::FixtureIoError& e) {
    return fail(commands::kExitIo, e.what());
  } catch (const catalog::FixtureParseError& e) {
    return fail(commands::kExitValidation, e.what());
  }
}

int run_simulate(const std::string& fixture, const std::string& mood_label, std::size_t trials,
                 std::uint64_t seed, commands::OutputFormat format) {
  try {
    const MoodCategory mood = parse_mood(mood_label);
    pipeline::PipelineConfig config;
    config.fetch.per_provider_rate = 1e6;
    if (trials == 0) {
      std::cout << commands::render(commands::SimulationReport{mood, 0, seed}, format);
      return commands::kExitOk;
    }
    auto provider = catalog::load_fixture_catalog(fixture);
    const auto report = commands::simulate(*provider, mood, trials, seed, config);
    std::cout << commands::render(report, format);
    return commands::kExitOk;
  } catch (const catalog::FixtureIoError& e) {
    return fail(commands::kExitIo, e.what());
  } catch (const catalog::CatalogError& e) {
    return fail(commands::kExitProvider, e.what());
  } catch (const pipeline::PoolTooSmallError& e) {
    return fail(commands::kExitProvider, e.what());
  } catch (const Error& e) {
    return fail(commands::kExitValidation, e.what());
  }
}

int run_analyze(const std::string& path, commands::OutputFormat format) {
  std::string text;
  try {
    text = catalog::read_text_file(path);
  } catch (const catalog::FixtureIoError& e) {
    return fail(commands::kExitIo, e.what());
  }
  try {
    const auto rows = store::parse_csv(text);
    std::cout << commands::render(commands::analyze(rows), format);
    return commands::kExitOk;
  } catch (const Error& e) {
    return fail(commands::kExitValidation, e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  CLI::App app{"moodtune - mood-assisted music recommendation platform"};
  app.require_subcommand(1);

  std::string format_flag = "text";
  const std::map<std::string, std::string> formats{{"text", "text"}, {"machine", "machine"}};

  std::string mode, fixture, bind, store_path, mood = "relaxed", export_path;
  std::uint64_t seed = 0;
  std::size_t trials = 1000;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log at info level");

  auto* serve = app.add_subcommand("serve", "Run the experiment HTTP service");
  serve->add_option("--mode", mode, "live or offline (default: MOODTUNE_MODE)");
  serve->add_option("--fixture", fixture, "Fixture catalog for offline mode");
  serve->add_option("--bind", bind, "host:port (default: MOODTUNE_BIND_ADDR)");
  serve->add_option("--store", store_path, "SQLite store file");
  auto* serve_seed = serve->add_option("--seed", seed, "Base seed for per-session randomness");

  auto* ingest = app.add_subcommand("ingest", "Validate a fixture catalog");
  ingest->add_option("--fixture,path", fixture, "Fixture catalog file")->required();
  ingest->add_option("--format", format_flag)->transform(CLI::CheckedTransformer(formats));

  auto* simulate = app.add_subcommand("simulate", "Run offline recommendation pairs");
  simulate->add_option("--fixture", fixture, "Fixture catalog file")->required();
  simulate->add_option("--mood", mood, "Target mood label");
  simulate->add_option("--trials", trials, "Number of pairs");
  simulate->add_option("--seed", seed, "Random seed");
  simulate->add_option("--format", format_flag)->transform(CLI::CheckedTransformer(formats));

  auto* analyze = app.add_subcommand("analyze", "Analyze a ratings export");
  analyze->add_option("--export,path", export_path, "Ratings export (CSV)")->required();
  analyze->add_option("--format", format_flag)->transform(CLI::CheckedTransformer(formats));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? commands::kExitOk : commands::kExitValidation;
  }
  if (verbose) spdlog::set_level(spdlog::level::info);
  const commands::OutputFormat format = commands::parse_format(format_flag);

  if (*serve) {
    std::optional<std::uint64_t> base_seed;
    if (serve_seed->count() > 0) base_seed = seed;
    return run_serve(mode, fixture, bind, store_path, base_seed);
  }
  if (*ingest) return run_ingest(fixture, format);
  if (*simulate) return run_simulate(fixture, mood, trials, seed, format);
  if (*analyze) return run_analyze(export_path, format);
  return commands::kExitValidation;
}
