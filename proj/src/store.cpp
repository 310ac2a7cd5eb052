#include "moodtune/store.hpp"

#include <map>
#include <random>
#include <sstream>

#include <sqlite3.h>

namespace moodtune::store {

namespace {

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw StoreError(StoreErrc::Storage,
                       std::string("prepare failed: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& bind(int index, const std::string& value) {
    sqlite3_bind_text(stmt_, index, value.c_str(), static_cast<int>(value.size()),
                      SQLITE_TRANSIENT);
    return *this;
  }
  Statement& bind(int index, std::string_view value) { return bind(index, std::string(value)); }
  Statement& bind(int index, int value) {
    sqlite3_bind_int(stmt_, index, value);
    return *this;
  }
  Statement& bind(int index, const std::optional<std::string>& value) {
    if (value) return bind(index, *value);
    sqlite3_bind_null(stmt_, index);
    return *this;
  }

  /// True while rows remain.
  bool step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    last_error_ = rc;
    throw StoreError(sqlite3_extended_errcode(db_) == SQLITE_CONSTRAINT_PRIMARYKEY
                         ? StoreErrc::DuplicateRating
                         : StoreErrc::Storage,
                     std::string("statement failed: ") + sqlite3_errmsg(db_));
  }

  std::string text(int column) const {
    const auto* p = sqlite3_column_text(stmt_, column);
    return p ? reinterpret_cast<const char*>(p) : "";
  }
  std::optional<std::string> optional_text(int column) const {
    if (sqlite3_column_type(stmt_, column) == SQLITE_NULL) return std::nullopt;
    return text(column);
  }
  int integer(int column) const { return sqlite3_column_int(stmt_, column); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
  int last_error_ = SQLITE_OK;
};

void exec(sqlite3* db, const char* sql) {
  char* message = nullptr;
  if (sqlite3_exec(db, sql, nullptr, nullptr, &message) != SQLITE_OK) {
    std::string detail = message ? message : "unknown error";
    sqlite3_free(message);
    throw StoreError(StoreErrc::Storage, "sqlite: " + detail);
  }
}

sqlite3* open_db(const std::filesystem::path& path, int flags) {
  sqlite3* db = nullptr;
  if (sqlite3_open_v2(path.c_str(), &db, flags | SQLITE_OPEN_FULLMUTEX, nullptr) != SQLITE_OK) {
    std::string detail = db ? sqlite3_errmsg(db) : "out of memory";
    sqlite3_close(db);
    throw StoreError(StoreErrc::Storage, "cannot open store '" + path.string() + "': " + detail);
  }
  sqlite3_busy_timeout(db, 5000);
  return db;
}

struct DbHandle {
  sqlite3* db;
  ~DbHandle() { sqlite3_close(db); }
};

// Rolls back unless committed.
class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { exec(db_, "BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    exec(db_, "COMMIT");
    done_ = true;
  }

 private:
  sqlite3* db_;
  bool done_ = false;
};

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS sessions (
  session_id TEXT PRIMARY KEY,
  pseudonym  TEXT NOT NULL,
  created_at TEXT NOT NULL,
  mode       TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS pairs (
  pair_id      TEXT PRIMARY KEY,
  session_id   TEXT NOT NULL REFERENCES sessions(session_id),
  mood         TEXT NOT NULL,
  control_id   TEXT NOT NULL,
  treatment_id TEXT NOT NULL,
  label_a_arm  TEXT NOT NULL,
  created_at   TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS ratings (
  pair_id    TEXT NOT NULL REFERENCES pairs(pair_id),
  arm        TEXT NOT NULL,
  session_id TEXT NOT NULL,
  mood       TEXT NOT NULL,
  rating     INTEGER NOT NULL CHECK (rating BETWEEN 1 AND 5),
  comment    TEXT,
  rated_at   TEXT NOT NULL,
  PRIMARY KEY (pair_id, arm)
);
)sql";

std::string quote_field(std::string_view value) {
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string plain_field(std::string_view value) {
  if (value.find_first_of(",\"\r\n") != std::string_view::npos) return quote_field(value);
  return std::string(value);
}

struct CsvField {
  std::string value;
  bool quoted = false;
};

}  // namespace

Arm StoredPair::arm_for(std::string_view label) const {
  const Arm other = label_a_arm == Arm::Control ? Arm::Treatment : Arm::Control;
  if (label == "A") return label_a_arm;
  if (label == "B") return other;
  throw ValidationError("label must be \"A\" or \"B\"");
}

std::string random_id() {
  static thread_local std::mt19937_64 engine{std::random_device{}()};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx",
                static_cast<unsigned long long>(engine()),
                static_cast<unsigned long long>(engine()));
  return buf;
}

ExperimentStore::ExperimentStore(const std::filesystem::path& path) : path_(path) {
  db_ = open_db(path, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
  try {
    exec(db_, "PRAGMA journal_mode=WAL");
    exec(db_, "PRAGMA synchronous=FULL");
    exec(db_, "PRAGMA foreign_keys=ON");
    exec(db_, kSchema);
  } catch (...) {
    sqlite3_close(db_);
    throw;
  }
}

ExperimentStore::~ExperimentStore() { sqlite3_close(db_); }

ExperimentSession ExperimentStore::create_session(const std::string& participant_pseudonym,
                                                  SessionMode mode) {
  if (participant_pseudonym.empty()) {
    throw StoreError(StoreErrc::Validation, "participant_pseudonym must be nonempty");
  }
  ExperimentSession session{random_id(), participant_pseudonym, utc_now_iso8601(), mode};
  std::lock_guard lock(write_mutex_);
  Statement insert(db_,
                   "INSERT INTO sessions (session_id, pseudonym, created_at, mode) "
                   "VALUES (?, ?, ?, ?)");
  insert.bind(1, session.session_id)
      .bind(2, session.participant_pseudonym)
      .bind(3, session.created_at)
      .bind(4, to_label(mode));
  insert.step();
  return session;
}

std::optional<ExperimentSession> ExperimentStore::find_session(
    const std::string& session_id) const {
  std::lock_guard lock(write_mutex_);
  Statement query(db_,
                  "SELECT session_id, pseudonym, created_at, mode FROM sessions "
                  "WHERE session_id = ?");
  query.bind(1, session_id);
  if (!query.step()) return std::nullopt;
  return ExperimentSession{query.text(0), query.text(1), query.text(2),
                           parse_session_mode(query.text(3))};
}

void ExperimentStore::record_pair(const std::string& session_id,
                                  const pipeline::RecommendationPair& pair) {
  std::lock_guard lock(write_mutex_);
  Transaction tx(db_);
  Statement session(db_, "SELECT 1 FROM sessions WHERE session_id = ?");
  session.bind(1, session_id);
  if (!session.step()) {
    throw StoreError(StoreErrc::UnknownSession, "unknown session '" + session_id + "'");
  }
  Statement insert(db_,
                   "INSERT INTO pairs (pair_id, session_id, mood, control_id, treatment_id, "
                   "label_a_arm, created_at) VALUES (?, ?, ?, ?, ?, ?, ?)");
  insert.bind(1, pair.pair_id)
      .bind(2, session_id)
      .bind(3, to_label(pair.mood))
      .bind(4, pair.control.canonical_id)
      .bind(5, pair.treatment.canonical_id)
      .bind(6, to_label(pair.blind_labels[0].arm))
      .bind(7, utc_now_iso8601());
  try {
    insert.step();
  } catch (const StoreError&) {
    throw StoreError(StoreErrc::Storage, "could not store pair '" + pair.pair_id + "'");
  }
  tx.commit();
}

std::optional<StoredPair> ExperimentStore::find_pair(const std::string& pair_id) const {
  std::lock_guard lock(write_mutex_);
  Statement query(db_,
                  "SELECT pair_id, session_id, mood, control_id, treatment_id, label_a_arm, "
                  "created_at FROM pairs WHERE pair_id = ?");
  query.bind(1, pair_id);
  if (!query.step()) return std::nullopt;
  return StoredPair{query.text(0),          query.text(1),
                    parse_mood(query.text(2)), query.text(3),
                    query.text(4),          parse_arm(query.text(5)),
                    query.text(6)};
}

void ExperimentStore::record_rating(const std::string& session_id,
                                    const RatingRecord& record) {
  if (record.rating < 1 || record.rating > 5) {
    throw StoreError(StoreErrc::OutOfRange,
                     "rating " + std::to_string(record.rating) + " outside 1-5");
  }
  std::lock_guard lock(write_mutex_);
  Transaction tx(db_);
  {
    Statement session(db_, "SELECT 1 FROM sessions WHERE session_id = ?");
    session.bind(1, session_id);
    if (!session.step()) {
      throw StoreError(StoreErrc::UnknownSession, "unknown session '" + session_id + "'");
    }
    Statement pair(db_, "SELECT session_id FROM pairs WHERE pair_id = ?");
    pair.bind(1, record.pair_id);
    if (!pair.step() || pair.text(0) != session_id) {
      throw StoreError(StoreErrc::UnknownPair,
                       "pair '" + record.pair_id + "' does not belong to this session");
    }
    Statement existing(db_, "SELECT 1 FROM ratings WHERE pair_id = ? AND arm = ?");
    existing.bind(1, record.pair_id).bind(2, to_label(record.arm));
    if (existing.step()) {
      throw StoreError(StoreErrc::DuplicateRating, "this item of the pair is already rated");
    }
  }
  Statement insert(db_,
                   "INSERT INTO ratings (pair_id, arm, session_id, mood, rating, comment, "
                   "rated_at) VALUES (?, ?, ?, ?, ?, ?, ?)");
  insert.bind(1, record.pair_id)
      .bind(2, to_label(record.arm))
      .bind(3, session_id)
      .bind(4, to_label(record.mood))
      .bind(5, record.rating)
      .bind(6, record.comment)
      .bind(7, record.rated_at.empty() ? utc_now_iso8601() : record.rated_at);
  insert.step();
  tx.commit();
}

std::vector<ExportRow> ExperimentStore::export_rows(const ExportFilter& filter) const {
  DbHandle reader{open_db(path_, SQLITE_OPEN_READONLY)};
  std::string sql =
      "SELECT r.session_id, r.pair_id, r.arm, r.mood, r.rating, r.comment, r.rated_at, "
      "(SELECT COUNT(*) FROM ratings r2 WHERE r2.pair_id = r.pair_id) "
      "FROM ratings r WHERE 1 = 1";
  if (filter.session_id) sql += " AND r.session_id = ?1";
  if (filter.mood) sql += " AND r.mood = ?2";
  if (filter.rated_from) sql += " AND r.rated_at >= ?3";
  if (filter.rated_to) sql += " AND r.rated_at <= ?4";
  sql += " ORDER BY r.rowid";

  Statement query(reader.db, sql.c_str());
  if (filter.session_id) query.bind(1, *filter.session_id);
  if (filter.mood) query.bind(2, to_label(*filter.mood));
  if (filter.rated_from) query.bind(3, *filter.rated_from);
  if (filter.rated_to) query.bind(4, *filter.rated_to);

  std::vector<ExportRow> rows;
  while (query.step()) {
    ExportRow row;
    row.session_id = query.text(0);
    row.pair_id = query.text(1);
    row.arm = parse_arm(query.text(2));
    row.mood = parse_mood(query.text(3));
    row.rating = query.integer(4);
    row.comment = query.optional_text(5);
    row.rated_at = query.text(6);
    row.pair_complete = query.integer(7) == 2;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<ExportRow>& rows) {
  out << kExportHeader << "\n";
  for (const ExportRow& row : rows) {
    out << plain_field(row.session_id) << ',' << plain_field(row.pair_id) << ','
        << to_label(row.arm) << ',' << to_label(row.mood) << ',' << row.rating << ','
        << (row.comment ? quote_field(*row.comment) : "") << ',' << plain_field(row.rated_at)
        << ',' << (row.pair_complete ? "true" : "false") << "\n";
  }
}

std::string to_csv(const std::vector<ExportRow>& rows) {
  std::ostringstream out;
  write_csv(out, rows);
  return out.str();
}

std::vector<ExportRow> parse_csv(std::string_view text) {
  std::vector<std::vector<CsvField>> records;
  std::vector<std::size_t> record_lines;
  std::vector<CsvField> current;
  CsvField field;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool in_quotes = false;
  bool field_started = false;

  auto end_field = [&] {
    current.push_back(std::move(field));
    field = {};
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(current.size() == 1 && current[0].value.empty() && !current[0].quoted)) {
      records.push_back(std::move(current));
      record_lines.push_back(record_line);
    }
    current.clear();
    record_line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.value += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.value += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field.quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\r') {
      continue;
    } else if (c == '\n') {
      ++line;
      end_record();
    } else {
      field.value += c;
      field_started = true;
    }
  }
  if (in_quotes) {
    throw ValidationError("line " + std::to_string(record_line) + ": unterminated quoted field");
  }
  if (field_started || !current.empty()) end_record();

  if (records.empty()) throw ValidationError("line 1: missing header row");
  std::string header;
  for (std::size_t i = 0; i < records[0].size(); ++i) {
    if (i) header += ',';
    header += records[0][i].value;
  }
  const bool flagged = header == kExportHeader;
  if (!flagged && header != kExportHeaderBase) {
    throw ValidationError("line 1: expected header '" + std::string(kExportHeader) + "'");
  }
  const std::size_t columns = records[0].size();

  std::vector<ExportRow> rows;
  std::map<std::string, int> per_pair;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& f = records[r];
    const std::string where = "line " + std::to_string(record_lines[r]) + ": ";
    if (f.size() != columns) {
      throw ValidationError(where + "expected " + std::to_string(columns) + " fields");
    }
    ExportRow row;
    try {
      row.session_id = f[0].value;
      row.pair_id = f[1].value;
      row.arm = parse_arm(f[2].value);
      row.mood = parse_mood(f[3].value);
      std::size_t used = 0;
      row.rating = std::stoi(f[4].value, &used);
      if (used != f[4].value.size()) throw ValidationError("rating is not an integer");
    } catch (const std::exception& e) {
      throw ValidationError(where + e.what());
    }
    if (row.rating < 1 || row.rating > 5) {
      throw ValidationError(where + "rating " + f[4].value + " outside 1-5");
    }
    if (f[5].quoted || !f[5].value.empty()) row.comment = f[5].value;
    row.rated_at = f[6].value;
    if (flagged) {
      if (f[7].value != "true" && f[7].value != "false") {
        throw ValidationError(where + "pair_complete must be true or false");
      }
      row.pair_complete = f[7].value == "true";
    }
    ++per_pair[row.pair_id];
    rows.push_back(std::move(row));
  }
  if (!flagged) {
    for (ExportRow& row : rows) row.pair_complete = per_pair[row.pair_id] == 2;
  }
  return rows;
}

}  // namespace moodtune::store
