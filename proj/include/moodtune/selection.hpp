#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "moodtune/mood.hpp"
#include "moodtune/random.hpp"
#include "moodtune/track.hpp"

namespace moodtune {

/// Parameters for the two selection policies. `k_neighbors` is the k-NN
/// result size and `temperature` is the Boltzmann decay constant in
/// exp(-D / temperature).
struct SelectionParams {
  std::size_t k_neighbors = 1;
  double temperature = 0.2;
  std::size_t r_samples = 1;
  std::uint64_t rng_seed = 0;

  /// Throws ValidationError unless temperature > 0, k_neighbors >= 1 and
  /// r_samples >= 1.
  void validate() const;
};

struct ScoredTrack {
  const Track* track = nullptr;
  double distance = 0.0;
  double weight = 0.0;
  double probability = 0.0;
};

/// (V[i] - v)^2 + (E[i] - e)^2 for every feature, in input order.
std::vector<double> squared_distances(const MoodPoint& target,
                                      std::span<const FeatureVector> features);

/// Plain Euclidean distances, used by the Boltzmann policy.
std::vector<double> euclidean_distances(const MoodPoint& target,
                                        std::span<const FeatureVector> features);

/// Indices of the k features closest to `target` by squared distance,
/// nondecreasing; equal distances keep ascending input order.
std::vector<std::size_t> knn_indices(const MoodPoint& target, std::size_t k,
                                     std::span<const FeatureVector> features);

std::vector<Track> knn_select(const MoodPoint& target, std::size_t k,
                              std::span<const Track> tracks);

/// exp(-distance / temperature) element-wise.
std::vector<double> boltzmann_weights(std::span<const double> distances,
                                      double temperature);

/// W[i] / sum(W). Throws ValidationError on empty input or on any weight
/// that is not finite and positive.
std::vector<double> normalize(std::span<const double> weights);

/// First-draw selection probabilities of the Boltzmann policy.
std::vector<double> softmax_probabilities(const MoodPoint& target,
                                          double temperature,
                                          std::span<const FeatureVector> features);

/// Draws `r` distinct indices: each draw samples from the Boltzmann
/// distribution renormalized over the indices not yet taken.
std::vector<std::size_t> softmax_indices(const MoodPoint& target,
                                         double temperature, std::size_t r,
                                         std::span<const FeatureVector> features,
                                         Rng& rng);

std::vector<Track> softmax_select(const MoodPoint& target,
                                  const SelectionParams& params,
                                  std::span<const Track> tracks, Rng& rng);

/// Scores every track against `target`, populating all ScoredTrack fields.
std::vector<ScoredTrack> score_tracks(const MoodPoint& target, double temperature,
                                      std::span<const Track> tracks);

/// `r` distinct indices out of [0, n), every r-subset equally likely.
std::vector<std::size_t> uniform_indices(std::size_t r, std::size_t n, Rng& rng);

std::vector<Track> uniform_select(std::size_t r, std::span<const Track> tracks,
                                  Rng& rng);

/// Features of every track; throws ValidationError naming the first track
/// that has none.
std::vector<FeatureVector> features_of(std::span<const Track> tracks);

}  // namespace moodtune
