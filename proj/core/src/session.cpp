#include "awaire/session.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <random>
#include <sstream>

#include <openssl/evp.h>

namespace awaire {

namespace fs = std::filesystem;

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 0xF];
  }
  return out;
}

std::string now_utc() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string random_id() {
  std::random_device rd;
  std::uniform_int_distribution<std::uint64_t> dist;
  const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd() ^ dist(rd);
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << v;
  return out.str();
}

Ballot ranking_from_json(const Json& value, const std::vector<Candidate>& roster) {
  if (value.is_string()) return parse_ranking(value.get<std::string>(), roster);
  if (!value.is_array()) {
    throw std::invalid_argument("ranking must be a string or an array of candidate names");
  }
  Ballot ballot;
  StandingSet seen = 0;
  for (const auto& item : value) {
    if (!item.is_string()) throw std::invalid_argument("ranking entries must be names");
    const auto name = item.get<std::string>();
    std::optional<CandidateId> id;
    for (const auto& c : roster) {
      if (c.name == name) id = c.id;
    }
    if (!id) throw std::invalid_argument("unknown candidate '" + name + "'");
    if (contains(seen, *id)) {
      throw std::invalid_argument("candidate '" + name + "' ranked twice");
    }
    seen |= singleton(*id);
    ballot.ranking.push_back(*id);
  }
  return ballot;
}

Json names(const Ballot& ballot, const std::vector<Candidate>& roster) {
  Json out = Json::array();
  for (const auto c : ballot.ranking) out.push_back(roster.at(c).name);
  return out;
}

Json names(const EliminationOrder& order, const std::vector<Candidate>& roster) {
  Json out = Json::array();
  for (const auto c : order.order) out.push_back(roster.at(c).name);
  return out;
}

template <typename T>
T field_or(const Json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw std::invalid_argument(std::string("config field '") + key + "' has the wrong type");
  }
}

Audit make_audit(const SessionRequest& request) {
  const auto roster = request.roster();
  CandidateId winner = 0;
  bool found = false;
  for (const auto& c : roster) {
    if (c.name == request.reported_winner) {
      winner = c.id;
      found = true;
    }
  }
  if (!found) {
    throw std::invalid_argument("reported winner '" + request.reported_winner +
                                "' is not on the roster");
  }
  std::optional<TuningPlan> tuning;
  auto alt = enumerate_alt_orders(roster.size(), winner, request.config.max_candidates);
  auto pool = build_pool(alt);
  if (request.cvrs) tuning = tune_from_cvrs(*request.cvrs, pool, alt, request.config);
  return Audit(std::move(pool), std::move(alt), request.total_ballots, request.config,
               std::move(tuning));
}

}  // namespace

Json json_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return value;
}

SessionRequest SessionRequest::from_json(const Json& body) {
  if (!body.is_object()) throw std::invalid_argument("request body must be a JSON object");
  SessionRequest req;
  if (!body.contains("ballot_manifest") || !body["ballot_manifest"].is_object()) {
    throw std::invalid_argument("missing 'ballot_manifest' object");
  }
  const auto& manifest = body["ballot_manifest"];
  if (!manifest.contains("total_ballots") || !manifest["total_ballots"].is_number_integer() ||
      manifest["total_ballots"].get<long long>() < 1) {
    throw std::invalid_argument("'ballot_manifest.total_ballots' must be a positive integer");
  }
  req.total_ballots = manifest["total_ballots"].get<std::size_t>();
  if (!manifest.contains("candidates") || !manifest["candidates"].is_array()) {
    throw std::invalid_argument("'ballot_manifest.candidates' must be an array of names");
  }
  for (const auto& name : manifest["candidates"]) {
    if (!name.is_string() || name.get<std::string>().empty()) {
      throw std::invalid_argument("candidate names must be nonempty strings");
    }
    const auto n = name.get<std::string>();
    if (n.find_first_of(">,") != std::string::npos) {
      throw std::invalid_argument("candidate name '" + n + "' contains '>' or ','");
    }
    for (const auto& existing : req.candidates) {
      if (existing == n) throw std::invalid_argument("duplicate candidate '" + n + "'");
    }
    req.candidates.push_back(n);
  }
  if (req.candidates.size() < 2) {
    throw std::invalid_argument("at least two candidates are required");
  }
  if (!body.contains("reported_winner") || !body["reported_winner"].is_string()) {
    throw std::invalid_argument("missing 'reported_winner'");
  }
  req.reported_winner = body["reported_winner"].get<std::string>();

  const Json config = body.contains("config") ? body["config"] : Json::object();
  if (!config.is_object()) throw std::invalid_argument("'config' must be an object");
  req.config.risk_limit = field_or(config, "alpha", req.config.risk_limit);
  req.config.scheme = parse_weight_scheme(
      field_or(config, "scheme", std::string(to_string(req.config.scheme))));
  req.config.update_every = field_or(config, "update_every", req.config.update_every);
  req.config.alpha.eta0 = field_or(config, "eta0", req.config.alpha.eta0);
  req.config.alpha.d = field_or(config, "d", req.config.alpha.d);
  req.config.alpha.mu0 = field_or(config, "mu0", req.config.alpha.mu0);
  req.config.validate();

  if (body.contains("cvrs") && !body["cvrs"].is_null()) {
    if (!body["cvrs"].is_array()) throw std::invalid_argument("'cvrs' must be an array");
    const auto roster = req.roster();
    std::vector<Ballot> cvrs;
    for (const auto& item : body["cvrs"]) cvrs.push_back(ranking_from_json(item, roster));
    if (cvrs.empty()) throw std::invalid_argument("'cvrs' is empty");
    req.cvrs = std::move(cvrs);
  }
  return req;
}

Json SessionRequest::to_json() const {
  Json body;
  body["ballot_manifest"] = {{"total_ballots", total_ballots}, {"candidates", candidates}};
  body["reported_winner"] = reported_winner;
  body["config"] = {{"alpha", config.risk_limit},
                    {"scheme", std::string(to_string(config.scheme))},
                    {"update_every", config.update_every},
                    {"eta0", config.alpha.eta0},
                    {"d", config.alpha.d},
                    {"mu0", config.alpha.mu0}};
  if (cvrs) {
    const auto r = roster();
    Json list = Json::array();
    for (const auto& b : *cvrs) list.push_back(names(b, r));
    body["cvrs"] = std::move(list);
  }
  return body;
}

std::vector<Candidate> SessionRequest::roster() const {
  std::vector<Candidate> out;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    out.push_back({static_cast<CandidateId>(k), candidates[k]});
  }
  return out;
}

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::SessionCreated: return "SessionCreated";
    case EventKind::BallotEntered: return "BallotEntered";
    case EventKind::WeightsUpdated: return "WeightsUpdated";
    case EventKind::Decision: return "Decision";
  }
  return "?";
}

EventKind parse_event_kind(std::string_view text) {
  if (text == "SessionCreated") return EventKind::SessionCreated;
  if (text == "BallotEntered") return EventKind::BallotEntered;
  if (text == "WeightsUpdated") return EventKind::WeightsUpdated;
  if (text == "Decision") return EventKind::Decision;
  throw std::invalid_argument("unknown event kind '" + std::string(text) + "'");
}

std::string chain_checksum(const std::string& previous, std::uint64_t seq, EventKind kind,
                           const Json& payload) {
  Json body;
  body["seq"] = seq;
  body["kind"] = std::string(to_string(kind));
  body["payload"] = payload;
  return sha256_hex(previous + "\n" + body.dump());
}

Json SessionEvent::to_json() const {
  Json line;
  line["seq"] = seq;
  line["kind"] = std::string(to_string(kind));
  line["payload"] = payload;
  line["checksum"] = checksum;
  return line;
}

SessionEvent SessionEvent::from_json(const Json& line) {
  SessionEvent ev;
  ev.seq = line.at("seq").get<std::uint64_t>();
  ev.kind = parse_event_kind(line.at("kind").get<std::string>());
  ev.payload = line.at("payload");
  ev.checksum = line.at("checksum").get<std::string>();
  return ev;
}

Json status_to_json(const AuditStatus& status, const std::vector<Candidate>& candidates) {
  Json out;
  out["t"] = status.t;
  out["total_ballots"] = status.population;
  out["decision"] = std::string(to_string(status.decision));
  out["alpha"] = status.risk_limit;
  out["threshold_log"] = status.threshold_log;
  out["remaining"] = status.remaining;
  Json orders = Json::array();
  for (const auto& o : status.orders) {
    orders.push_back({{"order", names(o.order, candidates)},
                      {"log_e", json_number(o.log_e)},
                      {"rejected", o.rejected},
                      {"unrejectable", o.unrejectable}});
  }
  out["orders"] = std::move(orders);
  Json reqs = Json::array();
  for (const auto& r : status.requirements) {
    Json standing = Json::array();
    for (const auto& c : candidates) {
      if (contains(r.requirement.standing, c.id)) standing.push_back(c.name);
    }
    reqs.push_back({{"i", candidates.at(r.requirement.higher).name},
                    {"j", candidates.at(r.requirement.lower).name},
                    {"standing", std::move(standing)},
                    {"log_m", json_number(r.log_m)},
                    {"saturated", r.saturated}});
  }
  out["requirements"] = std::move(reqs);
  out["true_order"] = status.true_order ? names(*status.true_order, candidates) : Json();
  return out;
}

Session::Session(std::string id, SessionRequest request, std::string created_at,
                 std::optional<fs::path> log_path)
    : id_(std::move(id)),
      request_(std::move(request)),
      created_at_(std::move(created_at)),
      log_path_(std::move(log_path)),
      candidates_(request_.roster()),
      audit_(make_audit(request_)) {}

Session Session::create(std::string id, SessionRequest request,
                        std::optional<fs::path> log_path, std::string created_at) {
  if (created_at.empty()) created_at = now_utc();
  if (log_path && fs::exists(*log_path)) {
    throw std::runtime_error("session log '" + log_path->string() + "' already exists");
  }
  Session s(std::move(id), std::move(request), std::move(created_at), std::move(log_path));
  Json header;
  header["id"] = s.id_;
  header["created_at"] = s.created_at_;
  header["request"] = s.request_.to_json();
  s.append({{EventKind::SessionCreated, std::move(header)}});
  return s;
}

std::vector<Session::Pending> Session::apply(const Ballot& ballot) {
  if (audit_.decision() != Decision::Ongoing) throw SessionClosed("session closed");
  validate_ballot(ballot, candidates_.size());
  std::vector<Pending> out;
  out.push_back({EventKind::BallotEntered,
                 {{"t", audit_.draws() + 1}, {"ranking", names(ballot, candidates_)}}});
  const Decision d = audit_.observe(ballot);
  const std::size_t t = audit_.draws();
  if (d == Decision::Ongoing && audit_.config().scheme != WeightScheme::Fixed &&
      t % audit_.config().update_every == 0) {
    out.push_back({EventKind::WeightsUpdated, {{"t", t}}});
  }
  if (d != Decision::Ongoing) {
    Json payload = {{"t", t}, {"decision", std::string(to_string(d))}};
    if (audit_.true_order()) payload["true_order"] = names(*audit_.true_order(), candidates_);
    out.push_back({EventKind::Decision, std::move(payload)});
  }
  return out;
}

void Session::append(const std::vector<Pending>& pending) {
  std::string text;
  std::vector<SessionEvent> fresh;
  std::string previous = events_.empty() ? kGenesisChecksum : events_.back().checksum;
  for (const auto& p : pending) {
    SessionEvent ev;
    ev.seq = events_.size() + fresh.size() + 1;
    ev.kind = p.kind;
    ev.payload = p.payload;
    ev.checksum = chain_checksum(previous, ev.seq, ev.kind, ev.payload);
    previous = ev.checksum;
    text += ev.to_json().dump();
    text += '\n';
    fresh.push_back(std::move(ev));
  }
  if (log_path_) {
    std::ofstream out(*log_path_, std::ios::binary | std::ios::app);
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("cannot write session log '" + log_path_->string() + "'");
  }
  for (auto& ev : fresh) events_.push_back(std::move(ev));
}

Json Session::submit(const Ballot& ballot) {
  append(apply(ballot));
  return status();
}

Json Session::submit(const Json& body) {
  if (audit_.decision() != Decision::Ongoing) throw SessionClosed("session closed");
  const Json* ranking = &body;
  if (body.is_object()) {
    if (!body.contains("ranking")) throw std::invalid_argument("missing 'ranking'");
    ranking = &body["ranking"];
  }
  return submit(ranking_from_json(*ranking, candidates_));
}

Json Session::status() const {
  Json out;
  out["session_id"] = id_;
  out["created_at"] = created_at_;
  out["candidates"] = request_.candidates;
  out["reported_winner"] = request_.reported_winner;
  out.update(status_to_json(audit_.status(), candidates_));
  return out;
}

Session Session::replay(const fs::path& log_path) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw CorruptLog("cannot open session log '" + log_path.string() + "'");
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  in.close();

  std::vector<SessionEvent> events;
  std::uintmax_t good_bytes = 0;
  std::string previous = kGenesisChecksum;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const bool last = k + 1 == lines.size();
    try {
      auto ev = SessionEvent::from_json(Json::parse(lines[k]));
      if (ev.seq != k + 1) throw CorruptLog("sequence gap at line " + std::to_string(k + 1));
      if (ev.checksum != chain_checksum(previous, ev.seq, ev.kind, ev.payload)) {
        throw CorruptLog("checksum mismatch at line " + std::to_string(k + 1));
      }
      previous = ev.checksum;
      events.push_back(std::move(ev));
      good_bytes += lines[k].size() + 1;
    } catch (const std::exception& e) {
      // Only a torn final write is recoverable.
      if (!last) throw CorruptLog(log_path.string() + ": " + e.what());
      fs::resize_file(log_path, good_bytes);
    }
  }
  if (fs::file_size(log_path) + 1 == good_bytes) {
    // The final event is intact but its newline never reached the disk.
    std::ofstream(log_path, std::ios::binary | std::ios::app) << '\n';
  }
  if (events.empty() || events.front().kind != EventKind::SessionCreated) {
    throw CorruptLog(log_path.string() + ": missing SessionCreated header");
  }

  const auto& header = events.front().payload;
  SessionRequest request;
  try {
    request = SessionRequest::from_json(header.at("request"));
  } catch (const std::exception& e) {
    throw CorruptLog(log_path.string() + ": bad header: " + e.what());
  }
  Session s(header.at("id").get<std::string>(), std::move(request),
            header.at("created_at").get<std::string>(), log_path);

  std::vector<Pending> missing;
  std::size_t k = 1;
  while (k < events.size()) {
    const auto& ev = events[k];
    if (ev.kind != EventKind::BallotEntered) {
      throw CorruptLog(log_path.string() + ": unexpected " + std::string(to_string(ev.kind)) +
                       " event at seq " + std::to_string(ev.seq));
    }
    std::vector<Pending> derived;
    try {
      derived = s.apply(ranking_from_json(ev.payload.at("ranking"), s.candidates_));
    } catch (const std::exception& e) {
      throw CorruptLog(log_path.string() + ": cannot replay seq " + std::to_string(ev.seq) +
                       ": " + e.what());
    }
    if (derived.front().payload != ev.payload) {
      throw CorruptLog(log_path.string() + ": ballot payload mismatch at seq " +
                       std::to_string(ev.seq));
    }
    ++k;
    for (std::size_t d = 1; d < derived.size(); ++d) {
      if (k < events.size()) {
        if (events[k].kind != derived[d].kind || events[k].payload != derived[d].payload) {
          throw CorruptLog(log_path.string() + ": replay diverges at seq " +
                           std::to_string(events[k].seq));
        }
        ++k;
      } else {
        missing.push_back(derived[d]);
      }
    }
  }
  s.events_ = std::move(events);
  if (!missing.empty()) s.append(missing);
  return s;
}

SessionStore::SessionStore(std::optional<fs::path> data_dir) : data_dir_(std::move(data_dir)) {
  if (!data_dir_) return;
  fs::create_directories(*data_dir_);
  std::vector<fs::path> logs;
  for (const auto& entry : fs::directory_iterator(*data_dir_)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      logs.push_back(entry.path());
    }
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& path : logs) {
    auto session = Session::replay(path);
    const auto id = session.id();
    sessions_.emplace(id, std::make_unique<Entry>(std::move(session)));
  }
}

SessionStore::Entry& SessionStore::find(const std::string& id) const {
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + id + "'");
  return *it->second;
}

Json SessionStore::create(const Json& request) {
  auto parsed = SessionRequest::from_json(request);
  std::unique_lock lock(mutex_);
  std::string id;
  do {
    id = random_id();
  } while (sessions_.contains(id));
  std::optional<fs::path> path;
  if (data_dir_) path = *data_dir_ / (id + ".jsonl");
  auto session = Session::create(id, std::move(parsed), path, {});
  Json out;
  out["session_id"] = id;
  out["status"] = session.status();
  sessions_.emplace(id, std::make_unique<Entry>(std::move(session)));
  return out;
}

Json SessionStore::submit(const std::string& id, const Json& body) {
  auto& entry = find(id);
  std::lock_guard lock(entry.mutex);
  return entry.session.submit(body);
}

Json SessionStore::status(const std::string& id) const {
  auto& entry = find(id);
  std::lock_guard lock(entry.mutex);
  return entry.session.status();
}

std::string SessionStore::log(const std::string& id) const {
  auto& entry = find(id);
  std::lock_guard lock(entry.mutex);
  std::string out;
  for (const auto& ev : entry.session.events()) {
    out += ev.to_json().dump();
    out += '\n';
  }
  return out;
}

std::vector<std::string> SessionStore::ids() const {
  std::shared_lock lock(mutex_);
  std::vector<std::string> out;
  for (const auto& [id, entry] : sessions_) out.push_back(id);
  return out;
}

}  // namespace awaire
