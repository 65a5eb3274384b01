#include "awaire/tabulation.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace awaire {

TieBreak TieBreak::ascending(std::size_t num_candidates) {
  TieBreak tb;
  tb.priority.resize(num_candidates);
  std::iota(tb.priority.begin(), tb.priority.end(), CandidateId{0});
  return tb;
}

Tally tally(std::span<const Ballot> ballots, StandingSet standing,
            std::size_t num_candidates) {
  Tally counts(num_candidates, 0);
  for (const auto& b : ballots) {
    if (auto c = first_preference(b, standing)) ++counts[*c];
  }
  return counts;
}

EliminationResult tabulate(std::span<const Ballot> ballots,
                           std::size_t num_candidates, const TieBreak& tie_break) {
  if (num_candidates == 0) throw std::invalid_argument("no candidates");
  std::vector<std::size_t> rank(num_candidates, num_candidates);
  if (tie_break.priority.size() != num_candidates) {
    throw std::invalid_argument("tie-break order must list every candidate");
  }
  for (std::size_t k = 0; k < num_candidates; ++k) {
    const CandidateId c = tie_break.priority[k];
    if (c >= num_candidates || rank[c] != num_candidates) {
      throw std::invalid_argument("tie-break order is not a permutation");
    }
    rank[c] = k;
  }

  EliminationResult result;
  StandingSet standing = all_standing(num_candidates);
  for (std::size_t round = 0; round + 1 < num_candidates; ++round) {
    Tally counts = tally(ballots, standing, num_candidates);

    std::size_t lowest = ballots.size() + 1;
    std::vector<CandidateId> tied;
    for (CandidateId c = 0; c < num_candidates; ++c) {
      if (!contains(standing, c)) continue;
      if (counts[c] < lowest) {
        lowest = counts[c];
        tied.assign(1, c);
      } else if (counts[c] == lowest) {
        tied.push_back(c);
      }
    }
    const CandidateId out = *std::min_element(
        tied.begin(), tied.end(),
        [&](CandidateId x, CandidateId y) { return rank[x] < rank[y]; });
    if (tied.size() > 1) result.tie_events.push_back({round, tied, out});

    result.round_tallies.push_back(std::move(counts));
    result.round_standing.push_back(standing);
    result.order.order.push_back(out);
    standing &= ~singleton(out);
  }
  result.round_tallies.push_back(tally(ballots, standing, num_candidates));
  result.round_standing.push_back(standing);
  for (CandidateId c = 0; c < num_candidates; ++c) {
    if (contains(standing, c)) result.order.order.push_back(c);
  }
  return result;
}

EliminationResult tabulate(const Contest& contest) {
  return tabulate(contest, TieBreak::ascending(contest.num_candidates()));
}

EliminationResult tabulate(const Contest& contest, const TieBreak& tie_break) {
  return tabulate(contest.ballots(), contest.num_candidates(), tie_break);
}

AltOrderSet enumerate_alt_orders(std::size_t num_candidates,
                                 CandidateId reported_winner,
                                 std::size_t max_candidates) {
  if (num_candidates < 2) {
    throw std::invalid_argument("alt-orders need at least 2 candidates");
  }
  if (num_candidates > max_candidates) {
    throw std::invalid_argument(
        "contest has " + std::to_string(num_candidates) +
        " candidates; alt-order enumeration is limited to " +
        std::to_string(max_candidates));
  }
  if (reported_winner >= num_candidates) {
    throw std::invalid_argument("reported winner is not a candidate");
  }
  AltOrderSet set;
  set.num_candidates = num_candidates;
  set.reported_winner = reported_winner;
  std::vector<CandidateId> perm(num_candidates);
  std::iota(perm.begin(), perm.end(), CandidateId{0});
  do {
    if (perm.back() != reported_winner) set.orders.push_back({perm});
  } while (std::next_permutation(perm.begin(), perm.end()));
  return set;
}

}  // namespace awaire
