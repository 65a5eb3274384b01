#pragma once

#include <memory>
#include <string>

#include "awaire/session.hpp"

namespace awaire {

/// Loopback HTTP JSON front end for a SessionStore.
///
///   POST /sessions                 create, 201 {session_id, status}
///   GET  /sessions/{id}            status snapshot
///   POST /sessions/{id}/ballots    submit {"ranking": [...]}, returns status
///   GET  /sessions/{id}/log        event log as JSON Lines
///
/// Errors are {"error": message} with 400 (validation), 404 (unknown
/// session) or 409 (session closed).
class AuditService {
 public:
  explicit AuditService(SessionStore& store);
  ~AuditService();

  AuditService(const AuditService&) = delete;
  AuditService& operator=(const AuditService&) = delete;

  /// Binds `host:port` (port 0 picks a free port) and returns the bound
  /// port, or -1 on failure.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace awaire
