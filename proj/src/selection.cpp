#include "moodtune/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "moodtune/errors.hpp"

namespace moodtune {

namespace {

std::vector<Track> gather(std::span<const Track> tracks,
                          const std::vector<std::size_t>& indices) {
  std::vector<Track> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(tracks[i]);
  return out;
}

void require_pool(std::size_t requested, std::size_t available) {
  if (requested > available) throw InsufficientTracksError(requested, available);
}

// Probabilities from distances already shifted so their minimum is zero. The
// nearest weight is exactly 1, so the total never drops below 1; far weights
// may underflow to zero, which is their correct probability to double
// precision.
std::vector<double> shifted_probabilities(std::span<const double> shifted, double temperature) {
  std::vector<double> out = boltzmann_weights(shifted, temperature);
  const double total = std::accumulate(out.begin(), out.end(), 0.0);
  for (double& w : out) w /= total;
  return out;
}

}  // namespace

void SelectionParams::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ValidationError("temperature must be a positive finite number");
  }
  if (k_neighbors < 1) throw ValidationError("k_neighbors must be at least 1");
  if (r_samples < 1) throw ValidationError("r_samples must be at least 1");
}

std::vector<double> squared_distances(const MoodPoint& target,
                                      std::span<const FeatureVector> features) {
  std::vector<double> out;
  out.reserve(features.size());
  for (const FeatureVector& f : features) {
    const double dv = f.valence() - target.valence();
    const double de = f.energy() - target.energy();
    out.push_back(dv * dv + de * de);
  }
  return out;
}

std::vector<double> euclidean_distances(const MoodPoint& target,
                                        std::span<const FeatureVector> features) {
  std::vector<double> out = squared_distances(target, features);
  for (double& d : out) d = std::sqrt(d);
  return out;
}

std::vector<std::size_t> knn_indices(const MoodPoint& target, std::size_t k,
                                     std::span<const FeatureVector> features) {
  require_pool(k, features.size());
  const std::vector<double> distances = squared_distances(target, features);
  std::vector<std::size_t> order(features.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto closer = [&](std::size_t a, std::size_t b) {
    return distances[a] < distances[b];
  };
  // partial_sort is not stable, so break ties on index explicitly.
  auto closer_stable = [&](std::size_t a, std::size_t b) {
    return closer(a, b) || (!closer(b, a) && a < b);
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), closer_stable);
  order.resize(k);
  return order;
}

std::vector<Track> knn_select(const MoodPoint& target, std::size_t k,
                              std::span<const Track> tracks) {
  require_pool(k, tracks.size());
  return gather(tracks, knn_indices(target, k, features_of(tracks)));
}

std::vector<double> boltzmann_weights(std::span<const double> distances,
                                      double temperature) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  std::vector<double> out;
  out.reserve(distances.size());
  for (double d : distances) out.push_back(std::exp(-d / temperature));
  return out;
}

std::vector<double> normalize(std::span<const double> weights) {
  if (weights.empty()) throw ValidationError("cannot normalize an empty weight list");
  double total = 0.0;
  for (double w : weights) {
    if (!std::isfinite(w)) throw ValidationError("non-finite weight");
    if (!(w > 0.0)) throw ValidationError("weights must be positive");
    total += w;
  }
  std::vector<double> out;
  out.reserve(weights.size());
  for (double w : weights) out.push_back(w / total);
  return out;
}

std::vector<double> softmax_probabilities(const MoodPoint& target,
                                          double temperature,
                                          std::span<const FeatureVector> features) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  std::vector<double> distances = euclidean_distances(target, features);
  if (distances.empty()) throw ValidationError("no features to score");
  // Shifting by the minimum distance scales every weight by one constant,
  // leaving the normalized result unchanged.
  const double nearest = *std::min_element(distances.begin(), distances.end());
  for (double& d : distances) d -= nearest;
  return shifted_probabilities(distances, temperature);
}

std::vector<std::size_t> softmax_indices(const MoodPoint& target,
                                         double temperature, std::size_t r,
                                         std::span<const FeatureVector> features,
                                         Rng& rng) {
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  require_pool(r, features.size());
  const std::vector<double> distances = euclidean_distances(target, features);

  std::vector<std::size_t> remaining(features.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  std::vector<std::size_t> chosen;
  chosen.reserve(r);

  std::vector<double> shifted;
  for (std::size_t draw = 0; draw < r; ++draw) {
    double nearest = distances[remaining.front()];
    for (std::size_t i : remaining) nearest = std::min(nearest, distances[i]);
    shifted.clear();
    for (std::size_t i : remaining) shifted.push_back(distances[i] - nearest);
    const std::vector<double> probabilities = shifted_probabilities(shifted, temperature);

    const double u = rng.uniform();
    double cumulative = 0.0;
    std::size_t pick = probabilities.size() - 1;
    for (std::size_t j = 0; j < probabilities.size(); ++j) {
      cumulative += probabilities[j];
      if (u < cumulative) {
        pick = j;
        break;
      }
    }
    // Rounding can leave the cumulative sum a hair below 1; the fallback
    // must still land on a positive-probability entry.
    while (probabilities[pick] <= 0.0 && pick > 0) --pick;

    chosen.push_back(remaining[pick]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return chosen;
}

std::vector<Track> softmax_select(const MoodPoint& target,
                                  const SelectionParams& params,
                                  std::span<const Track> tracks, Rng& rng) {
  params.validate();
  require_pool(params.r_samples, tracks.size());
  return gather(tracks, softmax_indices(target, params.temperature,
                                        params.r_samples, features_of(tracks), rng));
}

std::vector<ScoredTrack> score_tracks(const MoodPoint& target, double temperature,
                                      std::span<const Track> tracks) {
  const std::vector<FeatureVector> features = features_of(tracks);
  const std::vector<double> distances = euclidean_distances(target, features);
  const std::vector<double> weights = boltzmann_weights(distances, temperature);
  std::vector<double> probabilities;
  if (!tracks.empty()) probabilities = softmax_probabilities(target, temperature, features);

  std::vector<ScoredTrack> out;
  out.reserve(tracks.size());
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    out.push_back({&tracks[i], distances[i], weights[i], probabilities[i]});
  }
  return out;
}

std::vector<std::size_t> uniform_indices(std::size_t r, std::size_t n, Rng& rng) {
  require_pool(r, n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first r slots end up a uniform r-permutation.
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  order.resize(r);
  return order;
}

std::vector<Track> uniform_select(std::size_t r, std::span<const Track> tracks,
                                  Rng& rng) {
  return gather(tracks, uniform_indices(r, tracks.size(), rng));
}

std::vector<FeatureVector> features_of(std::span<const Track> tracks) {
  std::vector<FeatureVector> out;
  out.reserve(tracks.size());
  for (const Track& t : tracks) {
    if (!t.features) {
      throw ValidationError("track '" + t.canonical_id + "' has no audio features");
    }
    out.push_back(*t.features);
  }
  return out;
}

}  // namespace moodtune
