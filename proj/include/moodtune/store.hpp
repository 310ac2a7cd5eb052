#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "moodtune/errors.hpp"
#include "moodtune/experiment.hpp"
#include "moodtune/pipeline.hpp"

struct sqlite3;

namespace moodtune::store {

enum class StoreErrc {
  Validation,
  UnknownSession,
  UnknownPair,
  DuplicateRating,
  OutOfRange,
  Storage,
};

class StoreError : public Error {
 public:
  StoreError(StoreErrc code, const std::string& message) : Error(message), code_(code) {}
  StoreErrc code() const noexcept { return code_; }

 private:
  StoreErrc code_;
};

struct ExperimentSession {
  std::string session_id;
  std::string participant_pseudonym;
  std::string created_at;
  SessionMode mode = SessionMode::Offline;
};

/// What the store keeps about a generated pair: enough to resolve blind
/// labels server-side and to detect repeated recommendations later.
struct StoredPair {
  std::string pair_id;
  std::string session_id;
  MoodCategory mood = MoodCategory::Neutral;
  std::string control_id;
  std::string treatment_id;
  Arm label_a_arm = Arm::Control;
  std::string created_at;

  Arm arm_for(std::string_view label) const;
};

struct ExportFilter {
  std::optional<std::string> session_id{};
  std::optional<MoodCategory> mood{};
  std::optional<std::string> rated_from{};  // inclusive, ISO-8601 UTC
  std::optional<std::string> rated_to{};    // inclusive
};

inline constexpr const char* kExportHeader =
    "session_id,pair_id,arm,mood,rating,comment,rated_at,pair_complete";
/// Header without the completeness flag, also accepted by parse_csv.
inline constexpr const char* kExportHeaderBase =
    "session_id,pair_id,arm,mood,rating,comment,rated_at";

/// Single-file SQLite store for sessions, pairs and ratings.
///
/// All writes go through one connection under a mutex. The database runs in
/// WAL mode with full synchronous commits, so an acknowledged rating survives
/// a process restart, and export reads use their own connection.
class ExperimentStore {
 public:
  explicit ExperimentStore(const std::filesystem::path& path);
  ~ExperimentStore();

  ExperimentStore(const ExperimentStore&) = delete;
  ExperimentStore& operator=(const ExperimentStore&) = delete;

  ExperimentSession create_session(const std::string& participant_pseudonym,
                                   SessionMode mode);
  std::optional<ExperimentSession> find_session(const std::string& session_id) const;

  void record_pair(const std::string& session_id, const pipeline::RecommendationPair& pair);
  std::optional<StoredPair> find_pair(const std::string& pair_id) const;

  /// Throws StoreError: UnknownSession, UnknownPair (pair missing or owned
  /// by another session), OutOfRange, DuplicateRating.
  void record_rating(const std::string& session_id, const RatingRecord& record);

  /// Rows ordered by insertion.
  std::vector<ExportRow> export_rows(const ExportFilter& filter = {}) const;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  sqlite3* db_ = nullptr;
  mutable std::mutex write_mutex_;
};

/// CSV with the fixed header row; comments are always quoted.
void write_csv(std::ostream& out, const std::vector<ExportRow>& rows);
std::string to_csv(const std::vector<ExportRow>& rows);

/// Parses an export produced by write_csv. Without a pair_complete column
/// the flag is recomputed from the rows themselves. Throws ValidationError
/// naming the line.
std::vector<ExportRow> parse_csv(std::string_view text);

/// Random 128-bit identifier as 32 lowercase hex characters.
std::string random_id();

}  // namespace moodtune::store
