#pragma once

#include <optional>
#include <string>

#include "moodtune/mood.hpp"

namespace moodtune {

/// (artist, title) pair used to query the similarity and search providers.
struct TrackDescriptor {
  std::string artist;
  std::string title;

  friend bool operator==(const TrackDescriptor&, const TrackDescriptor&) = default;
};

/// A song with its cross-provider identifiers. `canonical_id` is the taste
/// provider's track ID and is the identity used everywhere else.
struct Track {
  std::string canonical_id;
  std::string title;
  std::string artist;
  std::optional<TrackDescriptor> similarity_source_key;
  std::optional<std::string> feature_source_id;
  std::optional<FeatureVector> features;

  TrackDescriptor descriptor() const { return {artist, title}; }

  friend bool operator==(const Track&, const Track&) = default;
};

/// Case-insensitive (ASCII) equality used for artist and title matching.
bool iequals(std::string_view a, std::string_view b);

}  // namespace moodtune
