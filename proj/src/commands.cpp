#include "moodtune/commands.hpp"

#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "moodtune/selection.hpp"

namespace moodtune::commands {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json midranks_json(const stats::MidrankTable& table) {
  json out = json::object();
  for (int level = stats::kMaxRating; level >= stats::kMinRating; --level) {
    const auto& rank = table[static_cast<std::size_t>(level - 1)];
    if (rank) out[std::to_string(level)] = *rank;
  }
  return out;
}

ordered_json utest_json(const stats::UTestResult& r) {
  return {{"rank_sum_control", r.rank_sum_control},
          {"rank_sum_treatment", r.rank_sum_treatment},
          {"mu_rank", r.mu_rank},
          {"sigma", r.sigma},
          {"z", r.z},
          {"z_min_rank_sum", r.z_min_rank_sum},
          {"p_two_tailed", r.p_two_tailed}};
}

std::string optional_mean(const std::optional<double>& mean) {
  return mean ? fmt::format("{:.2f}", *mean) : std::string("-");
}

std::string midrank_line(const stats::MidrankTable& table) {
  std::string out;
  for (int level = stats::kMaxRating; level >= stats::kMinRating; --level) {
    const auto& rank = table[static_cast<std::size_t>(level - 1)];
    if (!rank) continue;
    if (!out.empty()) out += "  ";
    out += fmt::format("{}->{:g}", level, *rank);
  }
  return out;
}

void append_utest(std::string& out, const char* title, const stats::UTestResult& r) {
  out += fmt::format("{}\n", title);
  out += fmt::format("  rank sums       control {:.1f}  treatment {:.1f}\n", r.rank_sum_control,
                     r.rank_sum_treatment);
  out += fmt::format("  mu (rank sum)   {:.2f}\n", r.mu_rank);
  out += fmt::format("  sigma           {:.4f}\n", r.sigma);
  out += fmt::format("  z               {:.4f}\n", r.z);
  out += fmt::format("  z (min sum)     {:.4f}\n", r.z_min_rank_sum);
  out += fmt::format("  p (two-tailed)  {:.4f}\n", r.p_two_tailed);
}

}  // namespace

OutputFormat parse_format(std::string_view text) {
  if (text == "text") return OutputFormat::Text;
  if (text == "machine") return OutputFormat::Machine;
  throw ValidationError("format must be 'text' or 'machine'");
}

IngestReport ingest(const std::filesystem::path& path) {
  IngestReport report;
  report.path = path;
  const std::string text = catalog::read_text_file(path);
  report.violations = catalog::validate_fixture_text(text);
  if (report.violations.empty()) {
    report.counts = catalog::parse_fixture_catalog(text)->counts();
  }
  return report;
}

std::string render(const IngestReport& report, OutputFormat format) {
  const auto& c = report.counts;
  if (format == OutputFormat::Machine) {
    ordered_json out = {{"path", report.path.string()},
                        {"tracks", c.tracks},
                        {"top_tracks", c.top_tracks},
                        {"similarity_seeds", c.similarity_seeds},
                        {"similarity_links", c.similarity_links},
                        {"search_rows", c.search_rows},
                        {"feature_rows", c.feature_rows},
                        {"violations", json::array()}};
    for (const auto& v : report.violations) {
      out["violations"].push_back({{"field", v.field}, {"message", v.message}});
    }
    return out.dump(2) + "\n";
  }
  std::string out = fmt::format("fixture: {}\n", report.path.string());
  if (report.violations.empty()) {
    out += fmt::format("tracks:           {}\n", c.tracks);
    out += fmt::format("top tracks:       {}\n", c.top_tracks);
    out += fmt::format("similarity seeds: {} ({} links)\n", c.similarity_seeds,
                       c.similarity_links);
    out += fmt::format("search rows:      {}\n", c.search_rows);
    out += fmt::format("feature rows:     {}\n", c.feature_rows);
  }
  out += fmt::format("violations:       {}\n", report.violations.size());
  for (const auto& v : report.violations) out += fmt::format("  {}\n", v.to_string());
  return out;
}

SimulationReport simulate(catalog::CatalogProvider& provider, MoodCategory mood,
                          std::size_t trials, std::uint64_t seed,
                          const pipeline::PipelineConfig& config) {
  SimulationReport report;
  report.mood = mood;
  report.trials = trials;
  report.seed = seed;
  if (trials == 0) return report;

  Rng rng(seed);
  const std::vector<Track> top =
      provider.fetch_top_tracks({}, config.time_range, config.top_track_limit);
  const std::vector<Track> seeds = pipeline::select_seeds(top, config.n_seeds, rng);
  for (const Track& s : seeds) report.seed_ids.push_back(s.canonical_id);
  const pipeline::CandidatePool pool = pipeline::build_candidate_pool(seeds, provider, config);
  report.pool_size = pool.tracks.size();

  const MoodPoint target = target_point(mood);
  auto distance = [&](const Track& t) {
    const FeatureVector f = *t.features;
    return std::hypot(f.valence() - target.valence(), f.energy() - target.energy());
  };
  double treatment_total = 0.0;
  double control_total = 0.0;
  for (std::size_t i = 0; i < trials; ++i) {
    const pipeline::RecommendationPair pair = pipeline::generate_pair(pool, mood, config, rng);
    treatment_total += distance(pair.treatment);
    control_total += distance(pair.control);
    ++report.treatment.selections[pair.treatment.canonical_id];
    ++report.control.selections[pair.control.canonical_id];
    if (pair.presentation_order == pipeline::PresentationOrder::TreatmentFirst) {
      ++report.treatment_first;
    }
  }
  report.treatment.mean_distance = treatment_total / static_cast<double>(trials);
  report.control.mean_distance = control_total / static_cast<double>(trials);
  return report;
}

std::string render(const SimulationReport& report, OutputFormat format) {
  if (format == OutputFormat::Machine) {
    ordered_json out = {{"mood", to_label(report.mood)},
                        {"trials", report.trials},
                        {"seed", report.seed},
                        {"pool_size", report.pool_size},
                        {"seed_ids", report.seed_ids}};
    if (report.trials > 0) {
      out["treatment_mean_distance"] = report.treatment.mean_distance;
      out["control_mean_distance"] = report.control.mean_distance;
      out["treatment_first_fraction"] =
          static_cast<double>(report.treatment_first) / static_cast<double>(report.trials);
      out["treatment_selections"] = report.treatment.selections;
      out["control_selections"] = report.control.selections;
    }
    return out.dump(2) + "\n";
  }
  std::string out = fmt::format("mood: {}  trials: {}  seed: {}\n", to_label(report.mood),
                                report.trials, report.seed);
  if (report.trials == 0) return out;
  const MoodPoint target = target_point(report.mood);
  out += fmt::format("target: ({:.4f}, {:.4f})  pool: {} tracks\n", target.valence(),
                     target.energy(), report.pool_size);
  out += fmt::format("mean distance to target  treatment {:.4f}  control {:.4f}\n",
                     report.treatment.mean_distance, report.control.mean_distance);
  out += fmt::format("treatment shown first: {:.4f}\n",
                     static_cast<double>(report.treatment_first) /
                         static_cast<double>(report.trials));
  out += "selection frequency (treatment / control):\n";
  std::map<std::string, std::pair<std::size_t, std::size_t>> merged;
  for (const auto& [id, n] : report.treatment.selections) merged[id].first = n;
  for (const auto& [id, n] : report.control.selections) merged[id].second = n;
  const double trials = static_cast<double>(report.trials);
  for (const auto& [id, counts] : merged) {
    out += fmt::format("  {:<24} {:.4f}  {:.4f}\n", id, counts.first / trials,
                       counts.second / trials);
  }
  return out;
}

AnalysisReport analyze(const std::vector<ExportRow>& rows) {
  const stats::RatingSample sample = stats::sample_from_rows(rows);
  if (sample.control.empty() || sample.treatment.empty()) {
    throw ValidationError("analysis needs ratings for both arms");
  }
  AnalysisReport report;
  report.control = {stats::histogram(sample.control), stats::mean_rating(sample.control),
                    sample.control.size()};
  report.treatment = {stats::histogram(sample.treatment), stats::mean_rating(sample.treatment),
                      sample.treatment.size()};
  report.midranks = stats::midranks(sample, stats::RankMode::BestFirst);
  report.best_first = stats::mann_whitney(sample, stats::RankMode::BestFirst);
  report.corrected_midranks = stats::midranks(sample, stats::RankMode::Corrected);
  report.corrected = stats::mann_whitney(sample, stats::RankMode::Corrected);
  report.by_mood = stats::mean_by_mood(rows);
  return report;
}

std::string render(const AnalysisReport& report, OutputFormat format) {
  if (format == OutputFormat::Machine) {
    ordered_json by_mood = ordered_json::array();
    for (const auto& m : report.by_mood) {
      ordered_json row = {{"mood", to_label(m.mood)}};
      row["control_mean"] = m.control_mean ? ordered_json(*m.control_mean) : ordered_json();
      row["treatment_mean"] = m.treatment_mean ? ordered_json(*m.treatment_mean) : ordered_json();
      by_mood.push_back(row);
    }
    ordered_json out = {
        {"control",
         {{"n", report.control.count},
          {"histogram", report.control.histogram},
          {"mean", report.control.mean}}},
        {"treatment",
         {{"n", report.treatment.count},
          {"histogram", report.treatment.histogram},
          {"mean", report.treatment.mean}}},
        {"midranks", midranks_json(report.midranks)},
        {"u_test", utest_json(report.best_first)},
        {"corrected",
         {{"midranks", midranks_json(report.corrected_midranks)},
          {"u_test", utest_json(report.corrected)}}},
        {"by_mood", by_mood}};
    return out.dump(2) + "\n";
  }

  std::string out;
  out += "rating histogram (count per rating 1..5)\n";
  out += "  rating     1    2    3    4    5\n";
  auto bars = [](const stats::Histogram& h) {
    return fmt::format("{:>4} {:>4} {:>4} {:>4} {:>4}", h[0], h[1], h[2], h[3], h[4]);
  };
  out += fmt::format("  control {}\n", bars(report.control.histogram));
  out += fmt::format("  mood    {}\n", bars(report.treatment.histogram));
  out += fmt::format("means: control {:.4f} (n={})  mood-assisted {:.4f} (n={})\n",
                     report.control.mean, report.control.count, report.treatment.mean,
                     report.treatment.count);
  out += fmt::format("midranks (best first): {}\n", midrank_line(report.midranks));
  append_utest(out, "Mann-Whitney (best-first ranks, no tie correction)", report.best_first);
  out += fmt::format("midranks (ascending): {}\n", midrank_line(report.corrected_midranks));
  append_utest(out, "Mann-Whitney (ascending ranks, tie-corrected)", report.corrected);
  out += "mean rating by mood\n";
  out += fmt::format("  {:<12} {:>8} {:>14}\n", "mood", "control", "mood-assisted");
  for (const auto& m : report.by_mood) {
    out += fmt::format("  {:<12} {:>8} {:>14}\n", display_name(m.mood),
                       optional_mean(m.control_mean), optional_mean(m.treatment_mean));
  }
  return out;
}

}  // namespace moodtune::commands
