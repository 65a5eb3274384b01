#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "awaire/contest.hpp"
#include "awaire/tabulation.hpp"

namespace awaire {

/// "Directly beats": `higher` has more votes than `lower` when exactly the
/// candidates in `standing` remain.
struct DBRequirement {
  CandidateId higher = 0;
  CandidateId lower = 0;
  StandingSet standing = 0;

  bool operator==(const DBRequirement&) const = default;
  auto operator<=>(const DBRequirement&) const = default;
};

/// The C(C-1)/2 requirements that completely determine `order`, listed from
/// the final elimination backwards.
std::vector<DBRequirement> requirements_for_order(const EliminationOrder& order);

/// Ballot score whose population mean is below 1/2 iff the requirement holds:
/// 1 for a first preference (under `standing`) for `lower`, 0 for `higher`,
/// 1/2 otherwise.
inline double assorter(const DBRequirement& req, const Ballot& ballot) {
  const auto fp = first_preference(ballot, req.standing);
  if (!fp) return 0.5;
  if (*fp == req.lower) return 1.0;
  if (*fp == req.higher) return 0.0;
  return 0.5;
}

/// Assorter mean over a ballot population (exact up to final division).
double assorter_mean(const DBRequirement& req, std::span<const Ballot> ballots);

bool requirement_holds(const DBRequirement& req, const Contest& contest);

/// Deduplicated requirements shared by all alt-orders of one audit.
struct RequirementPool {
  std::vector<DBRequirement> requirements;
  /// per_order[i] lists pool indices for alt-order i, in
  /// requirements_for_order sequence.
  std::vector<std::vector<std::size_t>> per_order;
  /// Distinct standing sets across the pool and, per requirement, its index
  /// into this list.
  std::vector<StandingSet> standings;
  std::vector<std::size_t> standing_index;

  std::size_t size() const { return requirements.size(); }
};

RequirementPool build_pool(const AltOrderSet& alt_orders);

/// Upper bound on distinct (i, j, S) triples over C candidates.
std::size_t max_pool_size(std::size_t num_candidates);

std::string describe(const DBRequirement& req,
                     const std::vector<Candidate>& candidates);

/// Names in the standing set in id order, e.g. `{a,b,c}`.
std::string format_standing(StandingSet standing,
                            const std::vector<Candidate>& candidates);

}  // namespace awaire
