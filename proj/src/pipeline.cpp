#include "moodtune/pipeline.hpp"

#include <algorithm>
#include <cstdio>

#include <spdlog/spdlog.h>

#include "moodtune/fetch.hpp"

namespace moodtune::pipeline {

using catalog::CatalogError;
using catalog::ErrorKind;
using catalog::FetchRequest;

namespace {

std::string make_pair_id(Rng& rng) {
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx",
                static_cast<unsigned long long>(rng.next()),
                static_cast<unsigned long long>(rng.next()));
  return buf;
}

}  // namespace

void PipelineConfig::validate() const {
  if (n_seeds < 1) throw ValidationError("n_seeds must be at least 1");
  if (similar_per_seed < 1) throw ValidationError("similar_per_seed must be at least 1");
  if (pool_min < 2) throw ValidationError("pool_min must be at least 2");
  selection.validate();
  fetch.validate();
}

Arm RecommendationPair::arm_for(std::string_view label) const {
  for (const BlindLabel& b : blind_labels) {
    if (b.label == label) return b.arm;
  }
  throw ValidationError("label must be \"A\" or \"B\"");
}

std::vector<Track> select_seeds(std::span<const Track> top_tracks, std::size_t n_seeds,
                                Rng& rng) {
  if (top_tracks.empty()) throw EmptyTasteError();
  return uniform_select(std::min(n_seeds, top_tracks.size()), top_tracks, rng);
}

CandidatePool build_candidate_pool(std::span<const Track> seeds,
                                   catalog::CatalogProvider& provider,
                                   const PipelineConfig& config) {
  config.validate();
  if (seeds.empty()) throw ValidationError("at least one seed is required");

  CandidatePool pool;
  for (const Track& s : seeds) pool.seed_ids.insert(s.canonical_id);

  std::vector<FetchRequest<std::vector<TrackDescriptor>>> similar_requests;
  for (const Track& seed : seeds) {
    similar_requests.push_back({seed.canonical_id, "similarity", [&provider, seed, &config] {
                                  return provider.similar_tracks(seed, config.similar_per_seed);
                                }});
  }
  std::vector<TrackDescriptor> descriptors;
  for (auto& result : catalog::fetch_many(similar_requests, config.fetch)) {
    if (!result.ok()) {
      if (result.error->kind() == ErrorKind::NotFound) {
        spdlog::info("seed {} unknown to similarity source, skipped", result.key);
        continue;
      }
      throw *result.error;
    }
    for (TrackDescriptor& d : *result.value) {
      const bool seen = std::any_of(descriptors.begin(), descriptors.end(), [&](const auto& e) {
        return iequals(e.artist, d.artist) && iequals(e.title, d.title);
      });
      if (!seen) descriptors.push_back(std::move(d));
    }
  }

  std::vector<FetchRequest<Track>> resolve_requests;
  for (const TrackDescriptor& d : descriptors) {
    resolve_requests.push_back({d.artist + " - " + d.title, "search",
                                [&provider, d] { return provider.resolve_track(d); }});
  }
  std::vector<Track> candidates;
  std::set<std::string> taken;
  for (auto& result : catalog::fetch_many(resolve_requests, config.fetch)) {
    if (!result.ok()) {
      if (result.error->kind() == ErrorKind::NotFound) {
        ++pool.unresolved_count;
        continue;
      }
      throw *result.error;
    }
    Track& t = *result.value;
    if (pool.seed_ids.contains(t.canonical_id)) continue;
    if (!taken.insert(t.canonical_id).second) continue;
    candidates.push_back(std::move(t));
  }

  std::vector<FetchRequest<Track>> feature_requests;
  for (const Track& t : candidates) {
    feature_requests.push_back({t.canonical_id, "features", [&provider, track = t]() mutable {
                                  provider.audio_features(track);
                                  return track;
                                }});
  }
  for (auto& result : catalog::fetch_many(feature_requests, config.fetch)) {
    if (!result.ok()) {
      const ErrorKind kind = result.error->kind();
      if (kind == ErrorKind::UnmappedTrack || kind == ErrorKind::NotFound) {
        ++pool.excluded_count;
        continue;
      }
      throw *result.error;
    }
    pool.tracks.push_back(std::move(*result.value));
  }

  spdlog::info("candidate pool: {} tracks from {} seeds ({} without features, {} unresolved)",
               pool.tracks.size(), seeds.size(), pool.excluded_count, pool.unresolved_count);
  if (pool.tracks.size() < config.pool_min) {
    throw PoolTooSmallError(pool.tracks.size(), config.pool_min);
  }
  return pool;
}

RecommendationPair generate_pair(const CandidatePool& pool, MoodCategory mood,
                                 const PipelineConfig& config, Rng& rng) {
  const std::span<const Track> tracks(pool.tracks);
  if (tracks.size() < 2) throw InsufficientTracksError(2, tracks.size());
  const std::vector<FeatureVector> features = features_of(tracks);

  RecommendationPair pair;
  pair.pair_id = make_pair_id(rng);
  pair.mood = mood;

  const std::size_t treatment = softmax_indices(target_point(mood), config.selection.temperature,
                                                1, features, rng)
                                    .front();
  // Uniform over every index except the treatment's.
  std::size_t control = static_cast<std::size_t>(rng.below(tracks.size() - 1));
  if (control >= treatment) ++control;

  pair.treatment = tracks[treatment];
  pair.control = tracks[control];
  pair.presentation_order =
      rng.coin() ? PresentationOrder::TreatmentFirst : PresentationOrder::ControlFirst;
  if (pair.presentation_order == PresentationOrder::ControlFirst) {
    pair.blind_labels = {BlindLabel{"A", Arm::Control}, BlindLabel{"B", Arm::Treatment}};
  } else {
    pair.blind_labels = {BlindLabel{"A", Arm::Treatment}, BlindLabel{"B", Arm::Control}};
  }
  return pair;
}

}  // namespace moodtune::pipeline
