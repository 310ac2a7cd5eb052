#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "moodtune/commands.hpp"
#include "moodtune/errors.hpp"
#include "moodtune/fixture_catalog.hpp"
#include "moodtune/mood.hpp"
#include "moodtune/selection.hpp"
#include "moodtune/stats.hpp"
#include "moodtune/store.hpp"

namespace py = pybind11;
using namespace moodtune;

namespace {

using Point = std::pair<double, double>;

std::vector<FeatureVector> to_features(const std::vector<Point>& points) {
  std::vector<FeatureVector> out;
  out.reserve(points.size());
  for (const auto& [v, e] : points) out.emplace_back(v, e);
  return out;
}

MoodPoint to_target(const Point& p) { return MoodPoint(p.first, p.second); }

stats::RankMode to_mode(const std::string& mode) {
  if (mode == "best_first") return stats::RankMode::BestFirst;
  if (mode == "corrected") return stats::RankMode::Corrected;
  throw ValidationError("mode must be 'best_first' or 'corrected'");
}

py::dict utest_dict(const stats::UTestResult& r) {
  py::dict d;
  d["rank_sum_control"] = r.rank_sum_control;
  d["rank_sum_treatment"] = r.rank_sum_treatment;
  d["mu_rank"] = r.mu_rank;
  d["sigma"] = r.sigma;
  d["z"] = r.z;
  d["z_min_rank_sum"] = r.z_min_rank_sum;
  d["p_two_tailed"] = r.p_two_tailed;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the moodtune recommendation platform";

  // Later registrations take precedence, so the generic base goes first.
  py::register_exception<Error>(m, "MoodtuneError", PyExc_RuntimeError);
  py::register_exception<catalog::FixtureIoError>(m, "FixtureIoError", PyExc_OSError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<UnknownMoodError>(m, "UnknownMoodError", PyExc_ValueError);

  py::enum_<MoodCategory>(m, "Mood")
      .value("SAD", MoodCategory::Sad)
      .value("DISTRESSED", MoodCategory::Distressed)
      .value("ANGRY", MoodCategory::Angry)
      .value("TIRED", MoodCategory::Tired)
      .value("NEUTRAL", MoodCategory::Neutral)
      .value("STIMULATED", MoodCategory::Stimulated)
      .value("RELAXED", MoodCategory::Relaxed)
      .value("HAPPY", MoodCategory::Happy)
      .value("EXCITED", MoodCategory::Excited)
      .def_property_readonly("label", [](MoodCategory c) { return std::string(to_label(c)); });

  m.def("parse_mood", [](const std::string& label) { return parse_mood(label); });
  m.def("category_of", [](double v, double e) { return category_of(MoodPoint(v, e)); },
        py::arg("valence"), py::arg("energy"));
  m.def("target_point", [](MoodCategory c) {
    const MoodPoint p = target_point(c);
    return Point{p.valence(), p.energy()};
  });

  m.def("knn_indices",
        [](const Point& target, std::size_t k, const std::vector<Point>& points) {
          return knn_indices(to_target(target), k, to_features(points));
        },
        py::arg("target"), py::arg("k"), py::arg("points"));
  m.def("softmax_probabilities",
        [](const Point& target, double temperature, const std::vector<Point>& points) {
          return softmax_probabilities(to_target(target), temperature, to_features(points));
        },
        py::arg("target"), py::arg("temperature"), py::arg("points"));
  m.def("softmax_indices",
        [](const Point& target, double temperature, std::size_t r,
           const std::vector<Point>& points, std::uint64_t seed) {
          Rng rng(seed);
          return softmax_indices(to_target(target), temperature, r, to_features(points), rng);
        },
        py::arg("target"), py::arg("temperature"), py::arg("r"), py::arg("points"),
        py::arg("seed"));

  m.def("mann_whitney",
        [](const std::vector<int>& control, const std::vector<int>& treatment,
           const std::string& mode) {
          return utest_dict(stats::mann_whitney({control, treatment}, to_mode(mode)));
        },
        py::arg("control"), py::arg("treatment"), py::arg("mode") = "best_first");

  // The report commands return the CLI's machine-format JSON text.
  m.def("analyze_csv", [](const std::string& text) {
    return commands::render(commands::analyze(store::parse_csv(text)),
                            commands::OutputFormat::Machine);
  });
  m.def("ingest", [](const std::string& path) {
    return commands::render(commands::ingest(path), commands::OutputFormat::Machine);
  });
  m.def("simulate",
        [](const std::string& fixture, const std::string& mood, std::size_t trials,
           std::uint64_t seed) {
          pipeline::PipelineConfig config;
          config.fetch.per_provider_rate = 1e6;
          auto provider = catalog::load_fixture_catalog(fixture);
          const auto report = commands::simulate(*provider, parse_mood(mood), trials, seed, config);
          return commands::render(report, commands::OutputFormat::Machine);
        },
        py::arg("fixture"), py::arg("mood"), py::arg("trials"), py::arg("seed") = 0);
}
