#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "moodtune/errors.hpp"
#include "moodtune/selection.hpp"
#include "oracles.hpp"

using namespace moodtune;

namespace {

std::vector<Track> reference_tracks() {
  const std::vector<std::tuple<const char*, double, double>> rows = {
      {"A", 0.10, 0.17}, {"B", 0.08, 0.59}, {"C", 0.21, 0.87}, {"D", 0.82, 0.74},
      {"E", 0.42, 0.48}, {"F", 0.51, 0.73}, {"G", 0.71, 0.44}};
  std::vector<Track> out;
  for (const auto& [id, v, e] : rows) out.push_back(oracle::make_track(id, v, e));
  return out;
}

std::vector<std::pair<double, double>> random_points(Rng& rng, std::size_t n) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(rng.uniform(), rng.uniform());
  return pts;
}

std::vector<FeatureVector> to_features(const std::vector<std::pair<double, double>>& pts) {
  std::vector<FeatureVector> out;
  for (const auto& [v, e] : pts) out.emplace_back(v, e);
  return out;
}

double standard_error(double p, double n) { return std::sqrt(p * (1 - p) / n); }

}  // namespace

TEST(SquaredDistances, Examples) {
  const MoodPoint center(0.5, 0.5);
  const std::vector<FeatureVector> f = {{0.5, 0.5}, {0.42, 0.48}};
  const auto d = squared_distances(center, f);
  EXPECT_DOUBLE_EQ(d[0], 0.0);
  EXPECT_NEAR(d[1], 0.0068, 1e-12);
  const std::vector<FeatureVector> corner = {{1.0, 1.0}};
  EXPECT_DOUBLE_EQ(squared_distances(MoodPoint(0, 0), corner)[0], 2.0);
}

TEST(KnnSelect, ReferenceNeighbors) {
  const auto tracks = reference_tracks();
  const auto picked = knn_select(MoodPoint(0.5, 0.5), 3, tracks);
  ASSERT_EQ(picked.size(), 3u);
  EXPECT_EQ(picked[0].canonical_id, "E");
  EXPECT_EQ(picked[1].canonical_id, "G");
  EXPECT_EQ(picked[2].canonical_id, "F");
  const auto features = features_of(picked);
  const auto d = squared_distances(MoodPoint(0.5, 0.5), features);
  EXPECT_NEAR(d[0], 0.0068, 1e-12);
  EXPECT_NEAR(d[1], 0.0477, 1e-12);
  EXPECT_NEAR(d[2], 0.0530, 1e-12);
}

TEST(KnnSelect, ExactMatchAndFullSort) {
  const auto tracks = reference_tracks();
  EXPECT_EQ(knn_select(MoodPoint(0.82, 0.74), 1, tracks).front().canonical_id, "D");
  const auto all = knn_select(MoodPoint(0.5, 0.5), tracks.size(), tracks);
  ASSERT_EQ(all.size(), tracks.size());
  const auto d = squared_distances(MoodPoint(0.5, 0.5), features_of(all));
  EXPECT_TRUE(std::is_sorted(d.begin(), d.end()));
}

TEST(KnnSelect, RejectsOversizedK) {
  const auto tracks = reference_tracks();
  EXPECT_THROW(knn_select(MoodPoint(0.5, 0.5), 8, tracks), InsufficientTracksError);
}

TEST(KnnSelect, TiesKeepInputOrder) {
  std::vector<Track> tracks = {oracle::make_track("x", 0.6, 0.5), oracle::make_track("y", 0.4, 0.5),
                               oracle::make_track("z", 0.5, 0.6), oracle::make_track("w", 0.5, 0.4)};
  const auto picked = knn_select(MoodPoint(0.5, 0.5), 4, tracks);
  EXPECT_EQ(picked[0].canonical_id, "x");
  EXPECT_EQ(picked[3].canonical_id, "w");
}

TEST(KnnSelect, MatchesFullSortOracle) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(200);
    auto pts = random_points(rng, n);
    // Quantized coordinates force plenty of exact ties.
    if (trial % 2) {
      for (auto& [v, e] : pts) {
        v = std::round(v * 8) / 8;
        e = std::round(e * 8) / 8;
      }
    }
    const std::size_t k = 1 + rng.below(n);
    const MoodPoint target(std::round(rng.uniform() * 8) / 8, std::round(rng.uniform() * 8) / 8);
    ASSERT_EQ(knn_indices(target, k, to_features(pts)),
              oracle::knn(target.valence(), target.energy(), k, pts));
  }
}

TEST(Distances, SquaredAndEuclideanOrderAgree) {
  Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto f = to_features(random_points(rng, 50));
    const MoodPoint target(rng.uniform(), rng.uniform());
    const auto sq = squared_distances(target, f);
    const auto eu = euclidean_distances(target, f);
    std::vector<std::size_t> a(f.size()), b(f.size());
    std::iota(a.begin(), a.end(), 0);
    std::iota(b.begin(), b.end(), 0);
    std::stable_sort(a.begin(), a.end(), [&](auto i, auto j) { return sq[i] < sq[j]; });
    std::stable_sort(b.begin(), b.end(), [&](auto i, auto j) { return eu[i] < eu[j]; });
    ASSERT_EQ(a, b);
  }
}

TEST(BoltzmannWeights, Examples) {
  const std::vector<double> d = {0.0, 0.2, 0.2};
  const auto w = boltzmann_weights(d, 0.2);
  EXPECT_DOUBLE_EQ(w[0], 1.0);
  EXPECT_NEAR(w[1], 0.36788, 1e-5);
  EXPECT_DOUBLE_EQ(w[1], w[2]);
}

TEST(BoltzmannWeights, MonotoneInDistanceAndTemperature) {
  const std::vector<double> d = {0.0, 0.1, 0.3, 0.7, 1.4};
  const auto w = boltzmann_weights(d, 0.2);
  for (std::size_t i = 1; i < w.size(); ++i) EXPECT_LT(w[i], w[i - 1]);
  const std::vector<double> one = {0.3};
  double prev = 0.0;
  for (double tau : {0.05, 0.1, 0.2, 1.0, 5.0}) {
    const double x = boltzmann_weights(one, tau)[0];
    EXPECT_GT(x, prev);
    prev = x;
  }
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize(std::vector<double>{1, 1, 1, 1}), (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
  EXPECT_EQ(normalize(std::vector<double>{2}), std::vector<double>{1.0});
  EXPECT_EQ(normalize(std::vector<double>{1, 3}), (std::vector<double>{0.25, 0.75}));
}

TEST(Normalize, RejectsBadInput) {
  EXPECT_THROW(normalize(std::vector<double>{}), ValidationError);
  EXPECT_THROW(normalize(std::vector<double>{1.0, INFINITY}), ValidationError);
  EXPECT_THROW(normalize(std::vector<double>{1.0, std::nan("")}), ValidationError);
  EXPECT_THROW(normalize(std::vector<double>{1.0, 0.0}), ValidationError);
}

TEST(Normalize, SumsToOneAndPreservesRatios) {
  Rng rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> w;
    const std::size_t n = 1 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) w.push_back(1e-6 + rng.uniform() * 10);
    const auto p = normalize(w);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
    for (std::size_t i = 1; i < n; ++i) {
      const double expected = w[i] / w[0];
      EXPECT_NEAR((p[i] / p[0]) / expected, 1.0, 1e-9);
    }
  }
}

TEST(SoftmaxProbabilities, MatchDirectFormula) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto pts = random_points(rng, 1 + rng.below(30));
    const MoodPoint target(rng.uniform(), rng.uniform());
    const double tau = 0.05 + rng.uniform();
    const auto p = softmax_probabilities(target, tau, to_features(pts));
    const auto ref = oracle::softmax(target.valence(), target.energy(), tau, pts);
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_NEAR(p[i], ref[i], 1e-12);
  }
}

TEST(SoftmaxProbabilities, StableAtTinyTemperature) {
  const std::vector<FeatureVector> f = {{0.9, 0.9}, {0.1, 0.1}, {0.5, 0.6}};
  const auto p = softmax_probabilities(MoodPoint(0.5, 0.5), 1e-4, f);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
  EXPECT_NEAR(p[2], 1.0, 1e-12);
}

TEST(ScoreTracks, PopulatesAllFields) {
  const auto tracks = reference_tracks();
  const auto scored = score_tracks(MoodPoint(0.5, 0.5), 0.2, tracks);
  double total = 0.0;
  for (const auto& s : scored) {
    EXPECT_NEAR(s.weight, std::exp(-s.distance / 0.2), 1e-12);
    total += s.probability;
  }
  EXPECT_NEAR(total, 1.0, 1e-9);
  EXPECT_NEAR(scored[4].distance, std::sqrt(0.0068), 1e-12);
}

TEST(SoftmaxSelect, SingleTrack) {
  const std::vector<Track> one = {oracle::make_track("solo", 0.2, 0.9)};
  Rng rng(1);
  SelectionParams params;
  EXPECT_EQ(softmax_select(MoodPoint(0.5, 0.5), params, one, rng).front().canonical_id, "solo");
}

TEST(SoftmaxSelect, EqualDistancesAreFair) {
  const std::vector<FeatureVector> f = {{0.3, 0.5}, {0.7, 0.5}};
  Rng rng(77);
  const int trials = 100000;
  int first = 0;
  for (int i = 0; i < trials; ++i) {
    first += softmax_indices(MoodPoint(0.5, 0.5), 0.2, 1, f, rng)[0] == 0 ? 1 : 0;
  }
  EXPECT_LE(std::abs(first / double(trials) - 0.5), 3 * standard_error(0.5, trials));
}

TEST(SoftmaxSelect, NearZeroTemperaturePicksNearest) {
  const std::vector<FeatureVector> f = {{0.5, 0.55}, {0.5, 0.65}, {0.2, 0.2}, {0.9, 0.9}};
  Rng rng(13);
  int nearest = 0;
  for (int i = 0; i < 10000; ++i) {
    nearest += softmax_indices(MoodPoint(0.5, 0.5), 1e-4, 1, f, rng)[0] == 0 ? 1 : 0;
  }
  EXPECT_GE(nearest / 10000.0, 0.999);
}

TEST(SoftmaxSelect, HighTemperatureIsNearlyUniform) {
  Rng setup(4);
  const auto f = to_features(random_points(setup, 10));
  Rng rng(9);
  const int trials = 100000;
  std::vector<int> counts(f.size());
  for (int i = 0; i < trials; ++i) ++counts[softmax_indices(MoodPoint(1, 0), 1000, 1, f, rng)[0]];
  for (int c : counts) EXPECT_LE(std::abs(c / double(trials) - 0.1), 3 * standard_error(0.1, trials));
}

TEST(SoftmaxSelect, MatchesEnumeratedDistribution) {
  Rng setup(99);
  for (std::size_t n : {2u, 5u, 12u}) {
    const auto pts = random_points(setup, n);
    const MoodPoint target(5.0 / 6, 1.0 / 6);
    const auto expected = oracle::softmax(target.valence(), target.energy(), 0.2, pts);
    Rng rng(1000 + n);
    const int trials = 200000;
    std::vector<int> counts(n);
    for (int i = 0; i < trials; ++i) ++counts[softmax_indices(target, 0.2, 1, to_features(pts), rng)[0]];
    for (std::size_t i = 0; i < n; ++i) {
      const double se = standard_error(expected[i], trials);
      EXPECT_LE(std::abs(counts[i] / double(trials) - expected[i]), 3 * se + 1e-12) << "track " << i;
    }
  }
}

TEST(SoftmaxSelect, WithoutReplacementRenormalizes) {
  // Three tracks; the second draw follows P restricted to the remaining two.
  const std::vector<std::pair<double, double>> pts = {{0.5, 0.5}, {0.6, 0.5}, {0.9, 0.9}};
  const auto p = oracle::softmax(0.5, 0.5, 0.2, pts);
  const double p_second_is_1 = p[0] * p[1] / (1 - p[0]) + p[2] * p[1] / (1 - p[2]);
  Rng rng(31);
  const int trials = 100000;
  int hits = 0;
  for (int i = 0; i < trials; ++i) {
    const auto picked = softmax_indices(MoodPoint(0.5, 0.5), 0.2, 2, to_features(pts), rng);
    ASSERT_NE(picked[0], picked[1]);
    hits += picked[1] == 1 ? 1 : 0;
  }
  EXPECT_LE(std::abs(hits / double(trials) - p_second_is_1), 3 * standard_error(p_second_is_1, trials));
}

TEST(SoftmaxSelect, DeterministicForSeed) {
  const auto tracks = reference_tracks();
  SelectionParams params;
  params.r_samples = 4;
  Rng a(42), b(42);
  EXPECT_EQ(softmax_select(MoodPoint(0.2, 0.8), params, tracks, a),
            softmax_select(MoodPoint(0.2, 0.8), params, tracks, b));
  params.r_samples = 8;
  EXPECT_THROW(softmax_select(MoodPoint(0.2, 0.8), params, tracks, a), InsufficientTracksError);
}

TEST(SelectionParams, Validate) {
  SelectionParams p;
  EXPECT_NO_THROW(p.validate());
  p.temperature = 0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.k_neighbors = 0;
  EXPECT_THROW(p.validate(), ValidationError);
  p = {};
  p.r_samples = 0;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(UniformSelect, Examples) {
  const auto tracks = reference_tracks();
  Rng rng(2);
  const std::vector<Track> one(tracks.begin(), tracks.begin() + 1);
  EXPECT_EQ(uniform_select(1, one, rng).front().canonical_id, "A");
  const std::vector<Track> five(tracks.begin(), tracks.begin() + 5);
  auto all = uniform_select(5, five, rng);
  std::vector<std::string> ids;
  for (const auto& t : all) ids.push_back(t.canonical_id);
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (std::vector<std::string>{"A", "B", "C", "D", "E"}));
  EXPECT_THROW(uniform_select(6, five, rng), InsufficientTracksError);
}

TEST(UniformSelect, EachTrackEquallyLikely) {
  Rng rng(17);
  const int trials = 100000;
  std::vector<int> counts(10);
  for (int i = 0; i < trials; ++i) ++counts[uniform_indices(1, 10, rng)[0]];
  for (int c : counts) EXPECT_LE(std::abs(c / double(trials) - 0.1), 3 * standard_error(0.1, trials));
}

TEST(UniformSelect, SubsetsEquallyLikely) {
  // All C(5,2) = 10 unordered pairs should appear uniformly.
  Rng rng(23);
  const int trials = 100000;
  std::map<std::pair<std::size_t, std::size_t>, int> counts;
  for (int i = 0; i < trials; ++i) {
    auto idx = uniform_indices(2, 5, rng);
    ASSERT_NE(idx[0], idx[1]);
    ++counts[{std::min(idx[0], idx[1]), std::max(idx[0], idx[1])}];
  }
  ASSERT_EQ(counts.size(), 10u);
  for (const auto& [key, c] : counts) {
    EXPECT_LE(std::abs(c / double(trials) - 0.1), 3 * standard_error(0.1, trials));
  }
}

TEST(FeaturesOf, RejectsTrackWithoutFeatures) {
  std::vector<Track> tracks = reference_tracks();
  tracks[2].features.reset();
  EXPECT_THROW(features_of(tracks), ValidationError);
  EXPECT_THROW(knn_select(MoodPoint(0.5, 0.5), 1, tracks), ValidationError);
}
