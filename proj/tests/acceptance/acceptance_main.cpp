// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <map>
#include <numeric>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "instrumented.hpp"
#include "moodtune/commands.hpp"
#include "moodtune/fixture_catalog.hpp"
#include "moodtune/selection.hpp"
#include "moodtune/service.hpp"
#include "moodtune/stats.hpp"
#include "moodtune/store.hpp"
#include "oracles.hpp"

using namespace moodtune;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

std::vector<FeatureVector> random_features(Rng& rng, std::size_t n, double quantum = 0.0) {
  std::vector<FeatureVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = rng.uniform();
    double e = rng.uniform();
    if (quantum > 0) {
      v = std::round(v / quantum) * quantum;
      e = std::round(e / quantum) * quantum;
    }
    out.emplace_back(v, e);
  }
  return out;
}

std::vector<std::pair<double, double>> as_points(const std::vector<FeatureVector>& f) {
  std::vector<std::pair<double, double>> out;
  for (const auto& x : f) out.emplace_back(x.valence(), x.energy());
  return out;
}

Outcome study_statistics() {
  const auto start = Clock::now();
  const auto sample = stats::RatingSample::from_counts({6, 7, 7, 4, 3}, {3, 1, 6, 11, 6});
  std::vector<ExportRow> rows;
  for (int r : sample.control) rows.push_back({"s", "p", Arm::Control, MoodCategory::Neutral, r});
  for (int r : sample.treatment) {
    rows.push_back({"s", "p", Arm::Treatment, MoodCategory::Neutral, r});
  }
  const commands::AnalysisReport a = commands::analyze(rows);
  const double elapsed = seconds_since(start);

  const std::array<double, 5> expected_midranks = {50, 41.5, 31, 17, 5};
  bool midranks_ok = true;
  for (int i = 0; i < 5; ++i) {
    midranks_ok = midranks_ok && a.midranks[i] && *a.midranks[i] == expected_midranks[i];
  }
  const auto& u = a.best_first;
  const bool ok = std::abs(a.control.mean - 2.67) <= 0.005 &&
                  std::abs(a.treatment.mean - 3.59) <= 0.005 && midranks_ok &&
                  u.rank_sum_control == 890.5 && u.rank_sum_treatment == 594.5 &&
                  std::abs(u.sigma - 57.8) <= 0.05 && std::abs(u.z_min_rank_sum - (-2.56)) <= 0.01 &&
                  std::abs(u.p_two_tailed - 0.010) <= 0.001 && elapsed < 1.0;
  return {ok, fmt::format("means {:.4f}/{:.4f}, rank sums {}/{}, sigma {:.4f}, z {:.4f}, "
                          "p {:.4f}, midranks {}, {:.3f} s",
                          a.control.mean, a.treatment.mean, u.rank_sum_control,
                          u.rank_sum_treatment, u.sigma, u.z_min_rank_sum, u.p_two_tailed,
                          midranks_ok ? "exact" : "MISMATCH", elapsed)};
}

Outcome rank_sum_identity() {
  Rng rng(2024);
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    stats::RatingSample s;
    const auto nc = 1 + rng.below(50);
    const auto nt = 1 + rng.below(50);
    for (std::uint64_t i = 0; i < nc; ++i) s.control.push_back(1 + static_cast<int>(rng.below(5)));
    for (std::uint64_t i = 0; i < nt; ++i) {
      s.treatment.push_back(1 + static_cast<int>(rng.below(5)));
    }
    const double n = static_cast<double>(nc + nt);
    for (auto mode : {stats::RankMode::BestFirst, stats::RankMode::Corrected}) {
      const auto sums = stats::rank_sums(s, mode);
      if (sums.control + sums.treatment != n * (n + 1) / 2) ++failures;
    }
  }
  return {failures == 0, fmt::format("1000 samples, both rank orders, {} mismatches", failures)};
}

Outcome knn_equivalence() {
  const auto start = Clock::now();
  Rng rng(555);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(1000);
    const std::size_t k = 1 + rng.below(n);
    // Every third instance sits on a coarse grid so equal distances occur.
    const auto features = random_features(rng, n, trial % 3 == 0 ? 0.1 : 0.0);
    const MoodPoint target(std::round(rng.uniform() * 10) / 10, std::round(rng.uniform() * 10) / 10);
    std::vector<Track> tracks;
    tracks.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      tracks.push_back(oracle::make_track(std::to_string(i), features[i].valence(), features[i].energy()));
    }
    const auto got = knn_select(target, k, tracks);
    const auto want = oracle::knn(target.valence(), target.energy(), k, as_points(features));
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].canonical_id == std::to_string(want[i]);
    }
    if (!same) ++mismatches;
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && elapsed < 10.0,
          fmt::format("1000 instances, {} mismatches, {:.2f} s", mismatches, elapsed)};
}

Outcome softmax_correctness() {
  const auto start = Clock::now();
  Rng setup(808);

  double worst_sum = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto features = random_features(setup, 1 + setup.below(200));
    const double tau = std::pow(10.0, -3.0 + 5.0 * setup.uniform());
    const MoodPoint target(setup.uniform(), setup.uniform());
    const auto p = softmax_probabilities(target, tau, features);
    worst_sum = std::max(worst_sum, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
  }

  int frequency_misses = 0;
  const int draws = 200000;
  for (std::size_t n = 2; n <= 12; ++n) {
    const auto features = random_features(setup, n);
    const MoodPoint target(setup.uniform(), setup.uniform());
    const auto expected = oracle::softmax(target.valence(), target.energy(), 0.2, as_points(features));
    Rng rng(9000 + n);
    std::vector<int> counts(n);
    for (int i = 0; i < draws; ++i) ++counts[softmax_indices(target, 0.2, 1, features, rng)[0]];
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(counts[i] / double(draws) - expected[i]) > 3 * se(expected[i], draws) + 1e-12) {
        ++frequency_misses;
      }
    }
  }

  // Nearest track 0.05 from the target, the next 0.15.
  const std::vector<FeatureVector> gap = {{0.5, 0.55}, {0.5, 0.65}, {0.2, 0.2}, {0.9, 0.9}};
  Rng cold(13);
  int nearest = 0;
  const int cold_draws = 100000;
  for (int i = 0; i < cold_draws; ++i) {
    nearest += softmax_indices(MoodPoint(0.5, 0.5), 1e-4, 1, gap, cold)[0] == 0;
  }
  const double nearest_share = nearest / double(cold_draws);

  const auto hot_features = random_features(setup, 10);
  Rng hot(21);
  std::vector<int> hot_counts(hot_features.size());
  for (int i = 0; i < draws; ++i) {
    ++hot_counts[softmax_indices(MoodPoint(1, 0), 1000, 1, hot_features, hot)[0]];
  }
  int hot_misses = 0;
  for (int c : hot_counts) hot_misses += std::abs(c / double(draws) - 0.1) > 3 * se(0.1, draws);

  const double elapsed = seconds_since(start);
  const bool ok = worst_sum <= 1e-9 && frequency_misses == 0 && nearest_share >= 0.999 &&
                  hot_misses == 0 && elapsed < 60.0;
  return {ok, fmt::format("max |sum-1| {:.2e}, enumeration misses {}, tau=1e-4 nearest {:.5f}, "
                          "tau=1000 misses {}, {:.2f} s",
                          worst_sum, frequency_misses, nearest_share, hot_misses, elapsed)};
}

Outcome mood_effect() {
  auto catalog = catalog::load_fixture_catalog(oracle::data_path("fixtures/catalog.json"));
  pipeline::PipelineConfig config;
  config.fetch.per_provider_rate = 1e6;
  const auto report = commands::simulate(*catalog, MoodCategory::Relaxed, 10000, 7, config);
  const double margin = report.control.mean_distance - report.treatment.mean_distance;
  return {margin >= 0.05 && report.trials == 10000,
          fmt::format("pool {}, treatment {:.4f}, control {:.4f}, margin {:.4f}",
                      report.pool_size, report.treatment.mean_distance,
                      report.control.mean_distance, margin)};
}

bool mentions_arm(std::string text) {
  for (char& c : text) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return text.find("control") != std::string::npos || text.find("treatment") != std::string::npos;
}

Outcome end_to_end() {
  const auto dir = std::filesystem::temp_directory_path() / ("moodtune-accept-" + store::random_id());
  std::filesystem::create_directories(dir);
  auto catalog = catalog::load_fixture_catalog(oracle::data_path("fixtures/catalog.json"));
  const auto counts = catalog->counts();

  std::set<std::pair<std::string, std::string>> seed_names;
  std::set<std::string> seed_ids;
  for (const Track& t : catalog->fetch_top_tracks({}, catalog::TimeRange::Medium, 1000)) {
    seed_names.emplace(t.title, t.artist);
    seed_ids.insert(t.canonical_id);
  }

  service::ServiceConfig config;
  config.admin_token = "acceptance";
  auto store = std::make_shared<store::ExperimentStore>(dir / "store.db");
  auto svc = std::make_shared<service::Service>(config, store, catalog);
  service::HttpServer server(svc);
  const int port = server.bind("127.0.0.1:0");
  server.start();
  httplib::Client client("127.0.0.1", port);

  int failures = 0;
  int leaks = 0;
  int seed_hits = 0;
  int pairs = 0;
  double slowest = 0.0;
  auto scan = [&](const httplib::Result& r) {
    if (!r) return;
    if (mentions_arm(r->body)) ++leaks;
    for (const auto& [name, value] : r->headers) leaks += mentions_arm(name + value);
  };

  const std::vector<std::string> moods = {"relaxed", "sad",   "tired",      "distressed", "neutral",
                                          "happy",   "angry", "stimulated", "excited"};
  for (int s = 0; s < 3; ++s) {
    auto session = client.Post("/api/v1/session",
                               json({{"participant_pseudonym", fmt::format("acc-{}", s)}}).dump(),
                               "application/json");
    scan(session);
    if (!session || session->status != 201) {
      ++failures;
      continue;
    }
    const std::string sid = json::parse(session->body)["session_id"];
    for (const std::string& mood : moods) {
      const auto t0 = Clock::now();
      auto pair = client.Post("/api/v1/session/" + sid + "/pair", json({{"mood", mood}}).dump(),
                              "application/json");
      slowest = std::max(slowest, seconds_since(t0));
      scan(pair);
      if (!pair || pair->status != 201) {
        ++failures;
        continue;
      }
      ++pairs;
      const json body = json::parse(pair->body);
      bool well_formed = body["items"].size() == 2 && body["items"][0]["label"] == "A" &&
                         body["items"][1]["label"] == "B";
      for (const json& item : body["items"]) {
        well_formed = well_formed && item.size() == 3;
        seed_hits += seed_names.contains({item["title"], item["artist"]});
      }
      const auto stored = store->find_pair(body["pair_id"]);
      if (!stored || stored->control_id == stored->treatment_id) well_formed = false;
      if (stored) seed_hits += seed_ids.contains(stored->control_id) + seed_ids.contains(stored->treatment_id);
      if (!well_formed) ++failures;

      for (const char* label : {"A", "B"}) {
        auto rating = client.Post(
            "/api/v1/session/" + sid + "/rating",
            json({{"pair_id", body["pair_id"]}, {"label", label}, {"rating", 3}}).dump(),
            "application/json");
        scan(rating);
        if (!rating || rating->status != 201) ++failures;
      }
      // Error paths are part of the visible surface as well.
      scan(client.Post("/api/v1/session/" + sid + "/rating",
                       json({{"pair_id", body["pair_id"]}, {"label", "A"}, {"rating", 3}}).dump(),
                       "application/json"));
    }
  }
  scan(client.Get("/api/v1/health"));
  server.stop();
  std::filesystem::remove_all(dir);

  const bool ok = counts.tracks >= 50 && failures == 0 && pairs == 27 && seed_hits == 0 &&
                  leaks == 0 && slowest < 2.0;
  return {ok, fmt::format("{} tracks, {} pairs, slowest POST /pair {:.3f} s, seed hits {}, "
                          "arm mentions {}, failures {}",
                          counts.tracks, pairs, slowest, seed_hits, leaks, failures)};
}

Outcome concurrency_contract() {
  auto catalog = catalog::load_fixture_catalog(oracle::data_path("fixtures/catalog.json"));
  bool ok = true;
  std::string detail;
  for (std::size_t bound : {1u, 4u, 10u}) {
    const auto r = harness::run_fetch_contract(*catalog, 1000, bound, 17 + bound);
    const bool pass = r.order_preserved && r.values_correct && r.isolation_holds &&
                      r.retries_recovered && r.peak_in_flight <= static_cast<int>(bound);
    ok = ok && pass;
    detail += fmt::format("{}bound {}: peak {} order {} isolation {} retries {}",
                          detail.empty() ? "" : "; ", bound, r.peak_in_flight,
                          r.order_preserved ? "ok" : "BROKEN", r.isolation_holds ? "ok" : "BROKEN",
                          r.retries_recovered ? "ok" : "BROKEN");
  }
  return {ok, "1000 requests per bound; " + detail};
}

Outcome per_mood_means() {
  const auto rows =
      store::parse_csv(catalog::read_text_file(oracle::data_path("exports/study_ratings.csv")));
  const auto report = commands::analyze(rows);
  const std::map<MoodCategory, std::pair<double, double>> expected = {
      {MoodCategory::Relaxed, {2.33, 5.00}},    {MoodCategory::Sad, {2.00, 4.00}},
      {MoodCategory::Tired, {2.33, 3.67}},      {MoodCategory::Distressed, {2.67, 2.67}},
      {MoodCategory::Neutral, {3.33, 3.67}},    {MoodCategory::Happy, {3.67, 4.00}},
      {MoodCategory::Angry, {1.00, 2.00}},      {MoodCategory::Stimulated, {4.67, 4.67}},
      {MoodCategory::Excited, {2.00, 2.67}}};
  int bad = 0;
  double worst = 0.0;
  for (const auto& m : report.by_mood) {
    const auto it = expected.find(m.mood);
    if (it == expected.end() || !m.control_mean || !m.treatment_mean) {
      ++bad;
      continue;
    }
    const double d = std::max(std::abs(*m.control_mean - it->second.first),
                              std::abs(*m.treatment_mean - it->second.second));
    worst = std::max(worst, d);
    if (d > 0.005) ++bad;
  }
  const bool ok = report.by_mood.size() == 9 && bad == 0;
  return {ok, fmt::format("{} mood rows, worst |delta| {:.4f}", report.by_mood.size(), worst)};
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::warn);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"study-statistics", study_statistics},
      {"rank-sum-identity", rank_sum_identity},
      {"knn-oracle", knn_equivalence},
      {"softmax", softmax_correctness},
      {"mood-effect", mood_effect},
      {"end-to-end-offline", end_to_end},
      {"concurrency-contract", concurrency_contract},
      {"per-mood-means", per_mood_means},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome outcome;
    const auto start = Clock::now();
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    failed += !outcome.pass;
    std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << " (" << outcome.detail
              << fmt::format(") [{:.2f} s]", seconds_since(start)) << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size())
            << std::endl;
  return failed == 0 ? 0 : 1;
}
