#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "awaire/contest.hpp"
#include "awaire/engine.hpp"

namespace awaire {

using Json = nlohmann::ordered_json;

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The session can no longer accept ballots.
class SessionClosed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The on-disk event log fails its checksum chain or replay checks.
class CorruptLog : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Body of `POST /sessions`:
///
///     {"ballot_manifest": {"total_ballots": 1000, "candidates": ["A", "B", "C"]},
///      "reported_winner": "A",
///      "config": {"alpha": 0.05, "scheme": "largest", "update_every": 25,
///                 "eta0": 0.52, "d": 50},
///      "cvrs": ["A>B", ["B", "C"], ""]}
///
/// Every config field and `cvrs` are optional.
struct SessionRequest {
  std::vector<std::string> candidates;
  std::size_t total_ballots = 0;
  std::string reported_winner;
  AuditConfig config;
  std::optional<std::vector<Ballot>> cvrs;

  /// Throws std::invalid_argument with a message naming the bad field.
  static SessionRequest from_json(const Json& body);
  Json to_json() const;

  std::vector<Candidate> roster() const;
};

enum class EventKind { SessionCreated, BallotEntered, WeightsUpdated, Decision };

std::string_view to_string(EventKind kind);
EventKind parse_event_kind(std::string_view text);

struct SessionEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::SessionCreated;
  Json payload;
  std::string checksum;

  Json to_json() const;
  static SessionEvent from_json(const Json& line);
};

/// SHA-256 (hex) over the previous checksum and this event's seq, kind and
/// payload. The first event chains from 64 zeros.
std::string chain_checksum(const std::string& previous, std::uint64_t seq, EventKind kind,
                           const Json& payload);

inline const std::string kGenesisChecksum(64, '0');

/// Encodes non-finite values as the strings "inf", "-inf" and "nan".
Json json_number(double value);

/// Status body served by `GET /sessions/{id}`.
Json status_to_json(const AuditStatus& status, const std::vector<Candidate>& candidates);

/// One live audit. State is always the deterministic replay of its event log;
/// when a log path is set every event is appended (JSON Lines) before the
/// call returns.
class Session {
 public:
  static Session create(std::string id, SessionRequest request,
                        std::optional<std::filesystem::path> log_path,
                        std::string created_at);

  /// Rebuilds a session from its log. A torn final line is truncated away;
  /// derived events missing after the last ballot are re-appended.
  /// Throws CorruptLog.
  static Session replay(const std::filesystem::path& log_path);

  /// Throws SessionClosed once decided and std::invalid_argument for a bad
  /// ranking.
  Json submit(const Ballot& ballot);
  Json submit(const Json& body);

  Json status() const;
  const std::string& id() const { return id_; }
  const std::vector<SessionEvent>& events() const { return events_; }
  const Audit& audit() const { return audit_; }
  const std::vector<Candidate>& candidates() const { return candidates_; }

 private:
  Session(std::string id, SessionRequest request, std::string created_at,
          std::optional<std::filesystem::path> log_path);

  struct Pending {
    EventKind kind;
    Json payload;
  };

  std::vector<Pending> apply(const Ballot& ballot);
  void append(const std::vector<Pending>& pending);

  std::string id_;
  SessionRequest request_;
  std::string created_at_;
  std::optional<std::filesystem::path> log_path_;
  std::vector<Candidate> candidates_;
  Audit audit_;
  std::vector<SessionEvent> events_;
};

/// All sessions of one service. Submissions to a session are serialised;
/// reads may interleave; distinct sessions are independent.
class SessionStore {
 public:
  /// With a data directory, every `*.jsonl` file in it is replayed.
  explicit SessionStore(std::optional<std::filesystem::path> data_dir = std::nullopt);

  /// Returns {"session_id", "status"}.
  Json create(const Json& request);
  Json submit(const std::string& id, const Json& body);
  Json status(const std::string& id) const;
  /// The event log as JSON Lines.
  std::string log(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  struct Entry {
    explicit Entry(Session s) : session(std::move(s)) {}

    mutable std::mutex mutex;
    Session session;
  };

  Entry& find(const std::string& id) const;

  std::optional<std::filesystem::path> data_dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::unique_ptr<Entry>> sessions_;
};

}  // namespace awaire
