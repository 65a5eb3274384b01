#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "awaire/contest.hpp"

namespace awaire {

/// Candidates in elimination sequence; the last entry is the winner.
struct EliminationOrder {
  std::vector<CandidateId> order;

  CandidateId winner() const { return order.back(); }
  std::size_t size() const { return order.size(); }

  bool operator==(const EliminationOrder&) const = default;
  auto operator<=>(const EliminationOrder&) const = default;
};

/// Among tied lowest-tally candidates, the one listed earliest in `priority`
/// is eliminated. The default is ascending candidate id.
struct TieBreak {
  std::vector<CandidateId> priority;

  static TieBreak ascending(std::size_t num_candidates);
};

struct TieEvent {
  std::size_t round = 0;
  std::vector<CandidateId> tied;
  CandidateId eliminated = 0;

  bool operator==(const TieEvent&) const = default;
};

/// Votes per candidate id; entries for candidates not standing are zero.
using Tally = std::vector<std::size_t>;

struct EliminationResult {
  EliminationOrder order;
  /// round_tallies[k] is the tally before the k-th elimination; the final
  /// entry holds the single remaining candidate.
  std::vector<Tally> round_tallies;
  std::vector<StandingSet> round_standing;
  std::vector<TieEvent> tie_events;
};

Tally tally(std::span<const Ballot> ballots, StandingSet standing,
            std::size_t num_candidates);

EliminationResult tabulate(std::span<const Ballot> ballots,
                           std::size_t num_candidates, const TieBreak& tie_break);

EliminationResult tabulate(const Contest& contest);
EliminationResult tabulate(const Contest& contest, const TieBreak& tie_break);

/// Every elimination order whose winner is not the reported winner.
struct AltOrderSet {
  std::size_t num_candidates = 0;
  CandidateId reported_winner = 0;
  std::vector<EliminationOrder> orders;

  std::size_t size() const { return orders.size(); }
};

inline constexpr std::size_t kDefaultMaxCandidates = 6;

/// Lexicographically ordered alt-orders, (C-1)*(C-1)! of them. Throws
/// std::invalid_argument for C < 2, C > max_candidates, or a bad winner id.
AltOrderSet enumerate_alt_orders(std::size_t num_candidates,
                                 CandidateId reported_winner,
                                 std::size_t max_candidates = kDefaultMaxCandidates);

}  // namespace awaire
