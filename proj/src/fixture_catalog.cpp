#include "moodtune/fixture_catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace moodtune::catalog {

using nlohmann::json;

namespace {

std::string join_messages(const std::vector<SchemaViolation>& violations) {
  std::string out = "fixture schema violation";
  if (violations.size() > 1) out += "s (" + std::to_string(violations.size()) + ")";
  out += ": ";
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) out += "; ";
    out += violations[i].to_string();
  }
  return out;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t end = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line =
        1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + end, '\n'));
    throw FixtureParseError(line, e.what());
  }
}

class Validator {
 public:
  std::vector<SchemaViolation> run(const json& doc) {
    if (!doc.is_object()) {
      add("$", "document must be an object");
      return violations_;
    }
    check_version(doc);
    check_tracks(doc);
    check_top_tracks(doc);
    check_similarity(doc);
    check_search(doc);
    return violations_;
  }

 private:
  void add(std::string field, std::string message) {
    violations_.push_back({std::move(field), std::move(message)});
  }

  bool require_string(const json& obj, const std::string& where, const char* key,
                      bool optional = false) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
      if (!optional) add(where + "." + key, "missing");
      return false;
    }
    if (!it->is_string() || it->get_ref<const std::string&>().empty()) {
      add(where + "." + key, "must be a nonempty string");
      return false;
    }
    return true;
  }

  const json* require_array(const json& doc, const char* key, bool optional = false) {
    auto it = doc.find(key);
    if (it == doc.end()) {
      if (!optional) add(key, "missing");
      return nullptr;
    }
    if (!it->is_array()) {
      add(key, "must be an array");
      return nullptr;
    }
    return &*it;
  }

  void check_version(const json& doc) {
    auto it = doc.find("schema_version");
    if (it == doc.end()) {
      add("schema_version", "missing");
    } else if (!it->is_number_integer() || it->get<int>() != kFixtureSchemaVersion) {
      add("schema_version", "unsupported value " + it->dump() + " (expected " +
                                std::to_string(kFixtureSchemaVersion) + ")");
    }
  }

  void check_unit(const json& row, const std::string& where, const char* key) {
    const json& v = row.at(key);
    if (!v.is_number()) {
      add(where + "." + key, "must be a number");
      return;
    }
    const double value = v.get<double>();
    if (!(value >= 0.0 && value <= 1.0)) {
      add(where + "." + key, "value " + v.dump() + " outside [0, 1]");
    }
  }

  void check_tracks(const json& doc) {
    const json* tracks = require_array(doc, "tracks");
    if (!tracks) return;
    for (std::size_t i = 0; i < tracks->size(); ++i) {
      const json& row = (*tracks)[i];
      std::string where = "tracks[" + std::to_string(i) + "]";
      if (!row.is_object()) {
        add(where, "must be an object");
        continue;
      }
      if (require_string(row, where, "canonical_id")) {
        const auto& id = row["canonical_id"].get_ref<const std::string&>();
        where += " (" + id + ")";
        if (!ids_.insert(id).second) add(where + ".canonical_id", "duplicate id");
      }
      require_string(row, where, "title");
      require_string(row, where, "artist");
      const bool has_feature_id = require_string(row, where, "feature_source_id", true);
      const bool has_valence = row.contains("valence") && !row["valence"].is_null();
      const bool has_energy = row.contains("energy") && !row["energy"].is_null();
      if (has_valence) check_unit(row, where, "valence");
      if (has_energy) check_unit(row, where, "energy");
      if (has_valence != has_energy) {
        add(where, "valence and energy must be given together");
      }
      if ((has_valence || has_energy) && !has_feature_id) {
        add(where + ".feature_source_id", "required when features are given");
      }
    }
  }

  void check_top_tracks(const json& doc) {
    const json* top = require_array(doc, "top_tracks", true);
    if (!top) return;
    for (std::size_t i = 0; i < top->size(); ++i) {
      const json& id = (*top)[i];
      const std::string where = "top_tracks[" + std::to_string(i) + "]";
      if (!id.is_string()) {
        add(where, "must be a canonical_id string");
      } else if (!ids_.contains(id.get<std::string>())) {
        add(where, "unknown canonical_id '" + id.get<std::string>() + "'");
      }
    }
  }

  void check_similarity(const json& doc) {
    const json* similarity = require_array(doc, "similarity");
    if (!similarity) return;
    for (std::size_t i = 0; i < similarity->size(); ++i) {
      const json& row = (*similarity)[i];
      const std::string where = "similarity[" + std::to_string(i) + "]";
      if (!row.is_object()) {
        add(where, "must be an object");
        continue;
      }
      require_string(row, where, "seed_id");
      auto related = row.find("related");
      if (related == row.end() || !related->is_array()) {
        add(where + ".related", "must be an array of [artist, title] pairs");
        continue;
      }
      for (std::size_t j = 0; j < related->size(); ++j) {
        if (!descriptor_from(related->at(j))) {
          add(where + ".related[" + std::to_string(j) + "]",
              "must be [artist, title] with nonempty strings");
        }
      }
    }
  }

  void check_search(const json& doc) {
    const json* search = require_array(doc, "search");
    if (!search) return;
    for (std::size_t i = 0; i < search->size(); ++i) {
      const json& row = (*search)[i];
      const std::string where = "search[" + std::to_string(i) + "]";
      if (!row.is_object()) {
        add(where, "must be an object");
        continue;
      }
      require_string(row, where, "artist");
      require_string(row, where, "title");
      require_string(row, where, "canonical_id");
    }
  }

 public:
  static std::optional<TrackDescriptor> descriptor_from(const json& value) {
    auto good = [](const json& s) {
      return s.is_string() && !s.get_ref<const std::string&>().empty();
    };
    if (value.is_array() && value.size() == 2 && good(value[0]) && good(value[1])) {
      return TrackDescriptor{value[0].get<std::string>(), value[1].get<std::string>()};
    }
    if (value.is_object() && value.contains("artist") && value.contains("title") &&
        good(value["artist"]) && good(value["title"])) {
      return TrackDescriptor{value["artist"].get<std::string>(),
                             value["title"].get<std::string>()};
    }
    return std::nullopt;
  }

 private:
  std::vector<SchemaViolation> violations_;
  std::set<std::string> ids_;
};

}  // namespace

FixtureSchemaError::FixtureSchemaError(std::vector<SchemaViolation> violations)
    : Error(join_messages(violations)), violations_(std::move(violations)) {}

std::vector<SchemaViolation> validate_fixture_text(std::string_view text) {
  return Validator().run(parse_json(text));
}

std::shared_ptr<FixtureCatalog> parse_fixture_catalog(std::string_view text) {
  const json doc = parse_json(text);
  std::vector<SchemaViolation> violations = Validator().run(doc);
  if (!violations.empty()) throw FixtureSchemaError(std::move(violations));

  auto catalog = std::make_shared<FixtureCatalog>();
  for (const json& row : doc["tracks"]) {
    Track track;
    track.canonical_id = row["canonical_id"].get<std::string>();
    track.title = row["title"].get<std::string>();
    track.artist = row["artist"].get<std::string>();
    if (row.contains("feature_source_id") && row["feature_source_id"].is_string()) {
      track.feature_source_id = row["feature_source_id"].get<std::string>();
    }
    if (row.contains("valence") && row["valence"].is_number()) {
      track.features.emplace(row["valence"].get<double>(), row["energy"].get<double>());
    }
    catalog->index_.emplace(track.canonical_id, catalog->tracks_.size());
    catalog->tracks_.push_back(std::move(track));
  }
  if (doc.contains("top_tracks")) {
    for (const json& id : doc["top_tracks"]) {
      catalog->top_track_ids_.push_back(id.get<std::string>());
    }
  } else {
    for (const Track& t : catalog->tracks_) catalog->top_track_ids_.push_back(t.canonical_id);
  }
  for (const json& row : doc["similarity"]) {
    auto& related = catalog->similarity_[row["seed_id"].get<std::string>()];
    for (const json& d : row["related"]) related.push_back(*Validator::descriptor_from(d));
  }
  for (const json& row : doc["search"]) {
    catalog->search_.push_back({row["artist"].get<std::string>(),
                                row["title"].get<std::string>(),
                                row["canonical_id"].get<std::string>()});
  }
  return catalog;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FixtureIoError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw FixtureIoError("error reading '" + path.string() + "'");
  return buffer.str();
}

std::shared_ptr<FixtureCatalog> load_fixture_catalog(const std::filesystem::path& path) {
  return parse_fixture_catalog(read_text_file(path));
}

const Track* FixtureCatalog::find(std::string_view canonical_id) const {
  auto it = index_.find(canonical_id);
  return it == index_.end() ? nullptr : &tracks_[it->second];
}

std::vector<Track> FixtureCatalog::fetch_top_tracks(const UserSession&, TimeRange,
                                                    std::size_t limit) {
  std::vector<Track> out;
  for (const std::string& id : top_track_ids_) {
    if (out.size() >= limit) break;
    const Track* t = find(id);
    out.push_back({t->canonical_id, t->title, t->artist, std::nullopt, std::nullopt,
                   std::nullopt});
  }
  return out;
}

std::vector<TrackDescriptor> FixtureCatalog::similar_tracks(const Track& seed,
                                                            std::size_t limit) {
  auto it = similarity_.find(seed.canonical_id);
  if (it == similarity_.end()) {
    throw CatalogError(ErrorKind::NotFound,
                       "seed '" + seed.canonical_id + "' unknown to similarity source");
  }
  return exclude_seed(it->second, seed, limit);
}

Track FixtureCatalog::resolve_track(const TrackDescriptor& descriptor) {
  if (descriptor.artist.empty() || descriptor.title.empty()) {
    throw ValidationError("descriptor needs both artist and title");
  }
  std::size_t title_hits = 0;
  for (const SearchRow& row : search_) {
    if (!iequals(row.title, descriptor.title)) continue;
    ++title_hits;
    if (!iequals(row.artist, descriptor.artist)) continue;
    if (title_hits > 1) {
      spdlog::debug("search for '{}' skipped {} hit(s) with a different artist",
                    descriptor.title, title_hits - 1);
    }
    Track track;
    track.canonical_id = row.canonical_id;
    track.title = row.title;
    track.artist = row.artist;
    track.similarity_source_key = descriptor;
    return track;
  }
  throw CatalogError(ErrorKind::NotFound, "no search hit for '" + descriptor.artist +
                                              " - " + descriptor.title + "'");
}

FeatureVector FixtureCatalog::audio_features(Track& track) {
  const Track* stored = find(track.canonical_id);
  if (!stored || !stored->feature_source_id) {
    throw CatalogError(ErrorKind::UnmappedTrack,
                       "track '" + track.canonical_id + "' has no feature-source mapping");
  }
  track.feature_source_id = stored->feature_source_id;
  if (!stored->features) {
    throw CatalogError(ErrorKind::UnmappedTrack,
                       "feature id '" + *stored->feature_source_id + "' has no features");
  }
  track.features = stored->features;
  return *stored->features;
}

FixtureCounts FixtureCatalog::counts() const {
  FixtureCounts c;
  c.tracks = tracks_.size();
  c.top_tracks = top_track_ids_.size();
  c.similarity_seeds = similarity_.size();
  for (const auto& [seed, related] : similarity_) c.similarity_links += related.size();
  c.search_rows = search_.size();
  c.feature_rows = static_cast<std::size_t>(std::count_if(
      tracks_.begin(), tracks_.end(), [](const Track& t) { return t.features.has_value(); }));
  return c;
}

}  // namespace moodtune::catalog
