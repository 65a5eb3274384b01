#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "awaire/contest.hpp"
#include "awaire/engine.hpp"

namespace awaire {

struct TrialResult {
  std::size_t sample_size = 0;
  Decision decision = Decision::FullCountNeeded;
  std::uint64_t permutation_seed = 0;

  bool operator==(const TrialResult&) const = default;
};

struct SimSummary {
  std::size_t n_reps = 0;
  double mean_sample_size = 0.0;
  double certification_rate = 0.0;
  std::uint64_t master_seed = 0;
  std::vector<TrialResult> per_trial;
  AuditConfig config_echo;
  bool tuned = false;
};

/// Seed of replication `k`: SplitMix64 applied to master_seed + k * 2^64/phi.
std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t k);

/// Sampling order over 0..population-1: a Fisher-Yates shuffle (from the last
/// position down) driven by std::mt19937_64 seeded with `seed`; each swap index
/// is drawn uniformly by 64-bit rejection sampling. Identical on every
/// platform.
std::vector<std::size_t> sampling_order(std::size_t population, std::uint64_t seed);

/// Audits `contest` for `reported_winner`, drawing ballots in `permutation`
/// order until a decision. Throws std::invalid_argument when `permutation`
/// is not a permutation of 0..B-1.
TrialResult run_once(const Contest& contest, CandidateId reported_winner,
                     std::span<const std::size_t> permutation, const AuditConfig& config,
                     const std::optional<TuningPlan>& tuning = std::nullopt,
                     std::uint64_t permutation_seed = 0);

/// Runs `n_reps` trials, trial k using sampling_order(B, trial_seed(master_seed, k)),
/// across `threads` workers (0 = hardware concurrency). Results are
/// independent of the thread count.
SimSummary run_replications(const Contest& contest, CandidateId reported_winner,
                            std::size_t n_reps, std::uint64_t master_seed,
                            const AuditConfig& config,
                            const std::optional<TuningPlan>& tuning = std::nullopt,
                            std::size_t threads = 0);

/// Relabels every ranking entry c as perm[c].
std::vector<Ballot> permute_labels(std::span<const Ballot> ballots,
                                   std::span<const CandidateId> perm);

/// Tuning plan for auditing `contest` with the given CVRs.
TuningPlan tune_for_contest(const Contest& contest, CandidateId reported_winner,
                            std::span<const Ballot> cvrs, const AuditConfig& config);

/// The second-to-last candidate of the true elimination order.
CandidateId runner_up(const Contest& contest);

/// `trial,seed,sample_size,decision` rows.
void write_trials_csv(std::ostream& out, const SimSummary& summary);
/// Summary JSON with a full config echo.
void write_summary_json(std::ostream& out, const SimSummary& summary);

}  // namespace awaire
