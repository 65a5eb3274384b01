#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace awaire {

using CandidateId = std::uint8_t;

/// Bitmask over candidate ids; bit c set means candidate c is still standing.
using StandingSet = std::uint64_t;

inline constexpr std::size_t kMaxCandidates = 64;

constexpr StandingSet singleton(CandidateId c) { return StandingSet{1} << c; }

constexpr bool contains(StandingSet s, CandidateId c) { return (s >> c) & 1U; }

constexpr StandingSet all_standing(std::size_t num_candidates) {
  return num_candidates >= 64 ? ~StandingSet{0}
                              : (StandingSet{1} << num_candidates) - 1;
}

struct Candidate {
  CandidateId id = 0;
  std::string name;

  bool operator==(const Candidate&) const = default;
};

/// A (possibly partial, possibly empty) ranking of distinct candidates.
struct Ballot {
  std::vector<CandidateId> ranking;

  bool operator==(const Ballot&) const = default;
  auto operator<=>(const Ballot&) const = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Immutable ballot population plus the reported winner.
class Contest {
 public:
  /// Throws std::invalid_argument when an invariant is violated.
  Contest(std::vector<Candidate> candidates, std::vector<Ballot> ballots,
          CandidateId reported_winner);

  const std::vector<Candidate>& candidates() const { return candidates_; }
  const std::vector<Ballot>& ballots() const { return ballots_; }
  CandidateId reported_winner() const { return reported_winner_; }

  std::size_t num_candidates() const { return candidates_.size(); }
  std::size_t num_ballots() const { return ballots_.size(); }
  StandingSet everyone() const { return all_standing(candidates_.size()); }

  std::optional<CandidateId> find(std::string_view name) const;
  /// Throws std::invalid_argument naming the candidate when not found.
  CandidateId id_of(std::string_view name) const;
  const std::string& name_of(CandidateId id) const;

  Contest with_reported_winner(CandidateId winner) const;

  bool operator==(const Contest&) const = default;

 private:
  std::vector<Candidate> candidates_;
  std::vector<Ballot> ballots_;
  CandidateId reported_winner_;
};

enum class BallotFormat { CsvRanks, AggregatedCsv };

/// Parses a ballot file. The reported winner is set to candidate 0; callers
/// override it with Contest::with_reported_winner.
Contest parse_ballot_file(std::string_view bytes, BallotFormat format);

Contest load_ballot_file(const std::string& path, BallotFormat format);

/// Aggregated when the first ballot line carries a `,<count>` column.
BallotFormat detect_format(std::string_view bytes);

/// Writes a file that parse_ballot_file reads back into an identical contest.
/// Always emits the roster header. Aggregated output run-length encodes
/// consecutive identical ballots so file order is preserved.
std::string serialise_ballot_file(const Contest& contest, BallotFormat format);

/// Checks ranking validity against a roster of `num_candidates`.
void validate_ballot(const Ballot& ballot, std::size_t num_candidates);

/// First standing candidate on the ballot, or nullopt when exhausted.
std::optional<CandidateId> first_preference(const Ballot& ballot,
                                            StandingSet standing);

/// Synthetic six-candidate contest that is hard to audit. `m` must satisfy
/// 2m in {0, ..., 8000}. Candidates are a, b, c1..c4 with ids 0..5; a wins.
Contest generate_pathological(double m);

std::string format_ranking(const Ballot& ballot,
                           const std::vector<Candidate>& candidates);

/// Parses `A>B>C` against a fixed roster. Throws std::invalid_argument.
Ballot parse_ranking(std::string_view text,
                     const std::vector<Candidate>& candidates);

}  // namespace awaire
