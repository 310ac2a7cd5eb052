#pragma once

#include <array>
#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "moodtune/catalog.hpp"
#include "moodtune/errors.hpp"
#include "moodtune/experiment.hpp"
#include "moodtune/random.hpp"
#include "moodtune/selection.hpp"

namespace moodtune::pipeline {

struct PipelineConfig {
  std::size_t n_seeds = 5;
  std::size_t similar_per_seed = 10;
  catalog::TimeRange time_range = catalog::TimeRange::Medium;
  SelectionParams selection;
  std::size_t pool_min = 10;
  std::size_t top_track_limit = 50;
  catalog::FetchPolicy fetch;

  void validate() const;
};

/// Enriched candidates that both arms draw from. Seeds never appear in it.
struct CandidatePool {
  std::vector<Track> tracks;
  std::size_t excluded_count = 0;    // resolved but without audio features
  std::size_t unresolved_count = 0;  // descriptors with no search match
  std::set<std::string> seed_ids;
};

enum class PresentationOrder { ControlFirst, TreatmentFirst };

struct BlindLabel {
  std::string label;  // "A" or "B"
  Arm arm;

  friend bool operator==(const BlindLabel&, const BlindLabel&) = default;
};

struct RecommendationPair {
  std::string pair_id;
  Track control;
  Track treatment;
  MoodCategory mood = MoodCategory::Neutral;
  PresentationOrder presentation_order = PresentationOrder::ControlFirst;
  std::array<BlindLabel, 2> blind_labels;  // in presentation order

  /// Throws ValidationError for labels other than "A" and "B".
  Arm arm_for(std::string_view label) const;
  const Track& track_for(Arm arm) const { return arm == Arm::Control ? control : treatment; }
};

class EmptyTasteError : public Error {
 public:
  EmptyTasteError() : Error("listener has no top tracks to seed from") {}
};

class PoolTooSmallError : public Error {
 public:
  PoolTooSmallError(std::size_t size, std::size_t minimum)
      : Error("candidate pool has " + std::to_string(size) + " tracks, need at least " +
              std::to_string(minimum)),
        size_(size) {}

  std::size_t size() const noexcept { return size_; }

 private:
  std::size_t size_;
};

/// min(n_seeds, |top_tracks|) distinct tracks chosen uniformly.
std::vector<Track> select_seeds(std::span<const Track> top_tracks, std::size_t n_seeds,
                                Rng& rng);

/// Seeds -> similar descriptors -> canonical tracks -> deduplicated,
/// seed-free, feature-enriched pool. Provider fan-out goes through
/// catalog::fetch_many under `config.fetch`.
///
/// Seeds unknown to the similarity source are skipped, and candidates that
/// do not resolve or have no features are dropped and counted. Any other
/// provider failure is rethrown as its CatalogError. Throws PoolTooSmallError
/// when fewer than `config.pool_min` tracks survive.
CandidatePool build_candidate_pool(std::span<const Track> seeds,
                                   catalog::CatalogProvider& provider,
                                   const PipelineConfig& config);

/// Treatment is one Boltzmann draw toward the mood's target point; control is
/// a uniform draw from the rest of the pool; a fair coin orders them.
RecommendationPair generate_pair(const CandidatePool& pool, MoodCategory mood,
                                 const PipelineConfig& config, Rng& rng);

}  // namespace moodtune::pipeline
