#include "awaire/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace awaire {

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t k) {
  std::uint64_t z = master_seed + (static_cast<std::uint64_t>(k) + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::size_t> sampling_order(std::size_t population, std::uint64_t seed) {
  std::vector<std::size_t> order(population);
  for (std::size_t k = 0; k < population; ++k) order[k] = k;
  std::mt19937_64 rng(seed);
  for (std::size_t i = population; i > 1; --i) {
    const std::uint64_t bound = i;
    // Largest multiple of `bound` representable; draws at or above it are rejected.
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    std::swap(order[i - 1], order[draw % bound]);
  }
  return order;
}

TrialResult run_once(const Contest& contest, CandidateId reported_winner,
                     std::span<const std::size_t> permutation, const AuditConfig& config,
                     const std::optional<TuningPlan>& tuning, std::uint64_t permutation_seed) {
  const std::size_t population = contest.num_ballots();
  if (permutation.size() != population) {
    throw std::invalid_argument("permutation length differs from the ballot count");
  }
  std::vector<bool> seen(population, false);
  for (const auto k : permutation) {
    if (k >= population || seen[k]) {
      throw std::invalid_argument("sampling order is not a permutation");
    }
    seen[k] = true;
  }

  Audit audit = Audit::for_contest(contest.num_candidates(), reported_winner, population,
                                   config, tuning);
  const auto& ballots = contest.ballots();
  for (const auto k : permutation) {
    const Decision d = audit.observe(ballots[k]);
    if (d == Decision::Certified) {
      return {audit.draws(), d, permutation_seed};
    }
    if (d == Decision::FullCountNeeded || audit.certification_impossible()) break;
  }
  return {population, Decision::FullCountNeeded, permutation_seed};
}

SimSummary run_replications(const Contest& contest, CandidateId reported_winner,
                            std::size_t n_reps, std::uint64_t master_seed,
                            const AuditConfig& config, const std::optional<TuningPlan>& tuning,
                            std::size_t threads) {
  if (n_reps == 0) throw std::invalid_argument("n_reps must be positive");
  config.validate();

  SimSummary summary;
  summary.n_reps = n_reps;
  summary.master_seed = master_seed;
  summary.config_echo = config;
  summary.tuned = tuning.has_value();
  summary.per_trial.resize(n_reps);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < n_reps; k = next++) {
      const auto seed = trial_seed(master_seed, k);
      const auto order = sampling_order(contest.num_ballots(), seed);
      summary.per_trial[k] = run_once(contest, reported_winner, order, config, tuning, seed);
    }
  };
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, n_reps);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
  }

  double total = 0.0;
  std::size_t certified = 0;
  for (const auto& trial : summary.per_trial) {
    total += static_cast<double>(trial.sample_size);
    if (trial.decision == Decision::Certified) ++certified;
  }
  summary.mean_sample_size = total / static_cast<double>(n_reps);
  summary.certification_rate = static_cast<double>(certified) / static_cast<double>(n_reps);
  return summary;
}

std::vector<Ballot> permute_labels(std::span<const Ballot> ballots,
                                   std::span<const CandidateId> perm) {
  std::vector<bool> used(perm.size(), false);
  for (const auto c : perm) {
    if (c >= perm.size() || used[c]) {
      throw std::invalid_argument("label map is not a permutation");
    }
    used[c] = true;
  }
  std::vector<Ballot> out;
  out.reserve(ballots.size());
  for (const auto& b : ballots) {
    Ballot relabelled;
    relabelled.ranking.reserve(b.ranking.size());
    for (const auto c : b.ranking) {
      if (c >= perm.size()) throw std::invalid_argument("ballot ranks a candidate outside the label map");
      relabelled.ranking.push_back(perm[c]);
    }
    out.push_back(std::move(relabelled));
  }
  return out;
}

TuningPlan tune_for_contest(const Contest& contest, CandidateId reported_winner,
                            std::span<const Ballot> cvrs, const AuditConfig& config) {
  const auto alt = enumerate_alt_orders(contest.num_candidates(), reported_winner,
                                        config.max_candidates);
  const auto pool = build_pool(alt);
  return tune_from_cvrs(cvrs, pool, alt, config);
}

CandidateId runner_up(const Contest& contest) {
  const auto result = tabulate(contest);
  const auto& order = result.order.order;
  if (order.size() < 2) throw std::invalid_argument("runner-up needs at least 2 candidates");
  return order[order.size() - 2];
}

void write_trials_csv(std::ostream& out, const SimSummary& summary) {
  out << "trial,seed,sample_size,decision\n";
  for (std::size_t k = 0; k < summary.per_trial.size(); ++k) {
    const auto& t = summary.per_trial[k];
    out << k << ',' << t.permutation_seed << ',' << t.sample_size << ','
        << to_string(t.decision) << '\n';
  }
}

void write_summary_json(std::ostream& out, const SimSummary& summary) {
  const auto& c = summary.config_echo;
  nlohmann::ordered_json j;
  j["n_reps"] = summary.n_reps;
  j["mean_sample_size"] = summary.mean_sample_size;
  j["certification_rate"] = summary.certification_rate;
  j["config"] = {
      {"alpha", c.risk_limit},
      {"scheme", std::string(to_string(c.scheme))},
      {"update_every", c.update_every},
      {"eta0", c.alpha.eta0},
      {"d", c.alpha.d},
      {"mu0", c.alpha.mu0},
      {"max_candidates", c.max_candidates},
      {"tuned_from_cvrs", summary.tuned},
      {"master_seed", summary.master_seed},
      {"prng", "mt19937_64 seeded by splitmix64(master_seed + (k+1)*0x9E3779B97F4A7C15)"},
      {"shuffle", "fisher-yates, descending, 64-bit rejection sampling"},
  };
  out << j.dump(2) << '\n';
}

}  // namespace awaire
