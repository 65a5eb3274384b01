#include "awaire/contest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace awaire {

namespace {

constexpr std::string_view kHeaderPrefix = "# candidates:";

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\v\f";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

class Roster {
 public:
  explicit Roster(bool declared) : declared_(declared) {}

  void declare(std::string_view name, std::size_t line) {
    if (name.empty()) throw ParseError(line, "empty candidate name in header");
    if (index_.contains(std::string(name))) {
      throw ParseError(line, "duplicate candidate '" + std::string(name) +
                                 "' in header");
    }
    add(name, line);
  }

  CandidateId resolve(std::string_view name, std::size_t line) {
    if (auto it = index_.find(std::string(name)); it != index_.end()) {
      return it->second;
    }
    if (declared_) {
      throw ParseError(line, "unknown candidate '" + std::string(name) + "'");
    }
    return add(name, line);
  }

  std::vector<Candidate> take() { return std::move(candidates_); }

 private:
  CandidateId add(std::string_view name, std::size_t line) {
    if (candidates_.size() >= kMaxCandidates) {
      throw ParseError(line, "more than 64 candidates");
    }
    const auto id = static_cast<CandidateId>(candidates_.size());
    candidates_.push_back({id, std::string(name)});
    index_.emplace(std::string(name), id);
    return id;
  }

  bool declared_;
  std::vector<Candidate> candidates_;
  std::unordered_map<std::string, CandidateId> index_;
};

Ballot parse_ranking_line(std::string_view text, Roster& roster,
                          std::size_t line) {
  Ballot ballot;
  text = trim(text);
  if (text.empty()) return ballot;
  StandingSet seen = 0;
  for (auto part : split(text, '>')) {
    part = trim(part);
    if (part.empty()) throw ParseError(line, "empty candidate in ranking");
    const CandidateId id = roster.resolve(part, line);
    if (contains(seen, id)) {
      throw ParseError(line,
                       "candidate '" + std::string(part) + "' ranked twice");
    }
    seen |= singleton(id);
    ballot.ranking.push_back(id);
  }
  return ballot;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what
                                   : "line " + std::to_string(line) + ": " +
                                         what),
      line_(line) {}

Contest::Contest(std::vector<Candidate> candidates, std::vector<Ballot> ballots,
                 CandidateId reported_winner)
    : candidates_(std::move(candidates)),
      ballots_(std::move(ballots)),
      reported_winner_(reported_winner) {
  if (candidates_.empty()) throw std::invalid_argument("contest has no candidates");
  if (candidates_.size() > kMaxCandidates) {
    throw std::invalid_argument("contest has more than 64 candidates");
  }
  if (ballots_.empty()) throw std::invalid_argument("contest has no ballots");
  for (std::size_t c = 0; c < candidates_.size(); ++c) {
    if (candidates_[c].id != c) {
      throw std::invalid_argument("candidate ids must be contiguous from 0");
    }
    for (std::size_t other = 0; other < c; ++other) {
      if (candidates_[other].name == candidates_[c].name) {
        throw std::invalid_argument("duplicate candidate name '" +
                                    candidates_[c].name + "'");
      }
    }
  }
  if (reported_winner_ >= candidates_.size()) {
    throw std::invalid_argument("reported winner is not a candidate");
  }
  for (const auto& b : ballots_) validate_ballot(b, candidates_.size());
}

std::optional<CandidateId> Contest::find(std::string_view name) const {
  for (const auto& c : candidates_) {
    if (c.name == name) return c.id;
  }
  return std::nullopt;
}

CandidateId Contest::id_of(std::string_view name) const {
  if (auto id = find(name)) return *id;
  throw std::invalid_argument("unknown candidate '" + std::string(name) + "'");
}

const std::string& Contest::name_of(CandidateId id) const {
  return candidates_.at(id).name;
}

Contest Contest::with_reported_winner(CandidateId winner) const {
  return Contest(candidates_, ballots_, winner);
}

void validate_ballot(const Ballot& ballot, std::size_t num_candidates) {
  StandingSet seen = 0;
  for (const CandidateId c : ballot.ranking) {
    if (c >= num_candidates) {
      throw std::invalid_argument("ballot ranks unknown candidate id " +
                                  std::to_string(c));
    }
    if (contains(seen, c)) {
      throw std::invalid_argument("ballot ranks candidate id " +
                                  std::to_string(c) + " twice");
    }
    seen |= singleton(c);
  }
}

std::optional<CandidateId> first_preference(const Ballot& ballot,
                                            StandingSet standing) {
  for (const CandidateId c : ballot.ranking) {
    if (contains(standing, c)) return c;
  }
  return std::nullopt;
}

Contest parse_ballot_file(std::string_view bytes, BallotFormat format) {
  if (bytes.empty()) throw ParseError(0, "empty file");

  auto lines = split(bytes, '\n');
  if (lines.size() > 1 && lines.back().empty()) lines.pop_back();

  std::size_t first_body_line = 0;
  const bool has_header =
      trim(lines.front()).substr(0, kHeaderPrefix.size()) == kHeaderPrefix;
  Roster roster(has_header);
  if (has_header) {
    const auto names = trim(lines.front()).substr(kHeaderPrefix.size());
    for (auto name : split(names, ',')) roster.declare(trim(name), 1);
    first_body_line = 1;
  }

  std::vector<Ballot> ballots;
  for (std::size_t n = first_body_line; n < lines.size(); ++n) {
    const std::size_t line_no = n + 1;
    if (format == BallotFormat::CsvRanks) {
      ballots.push_back(parse_ranking_line(lines[n], roster, line_no));
      continue;
    }
    const auto line = trim(lines[n]);
    const auto comma = line.rfind(',');
    if (comma == std::string_view::npos) {
      throw ParseError(line_no, "expected 'ranking,count'");
    }
    const auto count_text = trim(line.substr(comma + 1));
    long long count = 0;
    const auto [end, ec] = std::from_chars(
        count_text.data(), count_text.data() + count_text.size(), count);
    if (ec != std::errc{} || end != count_text.data() + count_text.size()) {
      throw ParseError(line_no, "invalid count '" + std::string(count_text) + "'");
    }
    if (count <= 0) {
      throw ParseError(line_no, "count must be positive");
    }
    const Ballot ballot = parse_ranking_line(line.substr(0, comma), roster, line_no);
    ballots.insert(ballots.end(), static_cast<std::size_t>(count), ballot);
  }
  if (ballots.empty()) throw ParseError(0, "file contains no ballots");

  auto candidates = roster.take();
  if (candidates.empty()) {
    throw ParseError(0, "no candidates declared or ranked");
  }
  return Contest(std::move(candidates), std::move(ballots), 0);
}

Contest load_ballot_file(const std::string& path, BallotFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_ballot_file(buf.str(), format);
}

BallotFormat detect_format(std::string_view bytes) {
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto end = bytes.find('\n', pos);
    if (end == std::string_view::npos) end = bytes.size();
    const auto line = bytes.substr(pos, end - pos);
    pos = end + 1;
    if (line.starts_with("# candidates:")) continue;
    return line.find(',') != std::string_view::npos ? BallotFormat::AggregatedCsv
                                                     : BallotFormat::CsvRanks;
  }
  return BallotFormat::CsvRanks;
}

std::string format_ranking(const Ballot& ballot,
                           const std::vector<Candidate>& candidates) {
  std::string out;
  for (std::size_t k = 0; k < ballot.ranking.size(); ++k) {
    if (k > 0) out += '>';
    out += candidates.at(ballot.ranking[k]).name;
  }
  return out;
}

Ballot parse_ranking(std::string_view text,
                     const std::vector<Candidate>& candidates) {
  Roster roster(true);
  for (const auto& c : candidates) roster.declare(c.name, 0);
  try {
    return parse_ranking_line(text, roster, 0);
  } catch (const ParseError& e) {
    throw std::invalid_argument(e.what());
  }
}

std::string serialise_ballot_file(const Contest& contest, BallotFormat format) {
  std::string out(kHeaderPrefix);
  out += ' ';
  for (const auto& c : contest.candidates()) {
    if (c.id > 0) out += ',';
    out += c.name;
  }
  out += '\n';

  const auto& ballots = contest.ballots();
  if (format == BallotFormat::CsvRanks) {
    for (const auto& b : ballots) {
      out += format_ranking(b, contest.candidates());
      out += '\n';
    }
    return out;
  }
  for (std::size_t k = 0; k < ballots.size();) {
    std::size_t run = 1;
    while (k + run < ballots.size() && ballots[k + run] == ballots[k]) ++run;
    out += format_ranking(ballots[k], contest.candidates());
    out += ',';
    out += std::to_string(run);
    out += '\n';
    k += run;
  }
  return out;
}

Contest generate_pathological(double m) {
  const double twice = 2.0 * m;
  if (!std::isfinite(twice) || twice != std::floor(twice)) {
    throw std::invalid_argument("2m must be an integer");
  }
  if (twice < 0.0 || twice > 8000.0) {
    throw std::invalid_argument("2m must lie in [0, 8000]");
  }
  const auto shift = static_cast<std::size_t>(twice);

  std::vector<Candidate> candidates = {{0, "a"},  {1, "b"},  {2, "c1"},
                                       {3, "c2"}, {4, "c3"}, {5, "c4"}};
  constexpr CandidateId a = 0;
  constexpr CandidateId b = 1;

  std::vector<Ballot> ballots;
  ballots.reserve(56000);
  ballots.insert(ballots.end(), 16000 + shift, Ballot{{a}});
  ballots.insert(ballots.end(), 8000 - shift, Ballot{{b}});
  for (CandidateId c = 2; c < 6; ++c) {
    ballots.insert(ballots.end(), 8000, Ballot{{c, b, a}});
  }
  return Contest(std::move(candidates), std::move(ballots), a);
}

}  // namespace awaire
