#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "moodtune/catalog.hpp"

namespace moodtune::catalog {

inline constexpr int kFixtureSchemaVersion = 1;

/// Malformed fixture text.
class FixtureParseError : public Error {
 public:
  FixtureParseError(std::size_t line, const std::string& detail)
      : Error("parse error at line " + std::to_string(line) + ": " + detail),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct SchemaViolation {
  std::string field;  // e.g. "tracks[3].valence"
  std::string message;

  std::string to_string() const { return field + ": " + message; }
};

/// Well-formed fixture that breaks the schema. Carries every violation found.
class FixtureSchemaError : public Error {
 public:
  explicit FixtureSchemaError(std::vector<SchemaViolation> violations);

  const std::vector<SchemaViolation>& violations() const noexcept { return violations_; }

 private:
  std::vector<SchemaViolation> violations_;
};

class FixtureIoError : public Error {
 public:
  using Error::Error;
};

struct FixtureCounts {
  std::size_t tracks = 0;
  std::size_t top_tracks = 0;
  std::size_t similarity_seeds = 0;
  std::size_t similarity_links = 0;
  std::size_t search_rows = 0;
  std::size_t feature_rows = 0;
};

/// Offline provider answering all four lookups from a local catalog file.
///
/// The document is a JSON object:
///
///   schema_version  1
///   tracks          [{canonical_id, title, artist, feature_source_id?,
///                     valence?, energy?}]
///   top_tracks      optional [canonical_id]; defaults to every track in order
///   similarity      [{seed_id, related: [[artist, title], ...]}]
///   search          [{artist, title, canonical_id}]
///
/// A track's feature row is implied by feature_source_id plus valence and
/// energy. Search hits are matched on title; the first row whose artist also
/// matches wins.
class FixtureCatalog final : public CatalogProvider {
 public:
  std::vector<Track> fetch_top_tracks(const UserSession& session, TimeRange range,
                                      std::size_t limit) override;
  std::vector<TrackDescriptor> similar_tracks(const Track& seed,
                                              std::size_t limit) override;
  Track resolve_track(const TrackDescriptor& descriptor) override;
  FeatureVector audio_features(Track& track) override;

  FixtureCounts counts() const;
  const std::vector<Track>& tracks() const noexcept { return tracks_; }

 private:
  friend std::shared_ptr<FixtureCatalog> parse_fixture_catalog(std::string_view text);

  struct SearchRow {
    std::string artist;
    std::string title;
    std::string canonical_id;
  };

  const Track* find(std::string_view canonical_id) const;

  std::vector<Track> tracks_;  // features and feature ids as stored
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::string> top_track_ids_;
  std::map<std::string, std::vector<TrackDescriptor>, std::less<>> similarity_;
  std::vector<SearchRow> search_;
};

/// Checks a fixture document and returns every violation (empty when valid).
/// Throws FixtureParseError if the text is not well-formed JSON.
std::vector<SchemaViolation> validate_fixture_text(std::string_view text);

/// Throws FixtureParseError or FixtureSchemaError.
std::shared_ptr<FixtureCatalog> parse_fixture_catalog(std::string_view text);

/// Throws FixtureIoError when the file cannot be read, then as
/// parse_fixture_catalog.
std::shared_ptr<FixtureCatalog> load_fixture_catalog(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace moodtune::catalog
