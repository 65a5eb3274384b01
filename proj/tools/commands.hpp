#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "awaire/contest.hpp"
#include "awaire/engine.hpp"
#include "awaire/simulate.hpp"

namespace awaire::cli {

enum class FormatChoice { Auto, Ranks, Aggregated };

FormatChoice parse_format_choice(const std::string& text);

Contest load_contest(const std::string& path, FormatChoice format);

/// Round-by-round tallies, the elimination order and any ties.
void print_check(std::ostream& out, const Contest& contest, const EliminationResult& result);

/// One line per pooled requirement:
/// `DB i>j | S={...} | true_mean=<6 places>`.
void print_explain(std::ostream& out, const Contest& contest, CandidateId reported_winner,
                   std::size_t max_candidates);

/// Parses "2,1,0" into a label map over `num_candidates` ids.
std::vector<CandidateId> parse_label_map(const std::string& text, std::size_t num_candidates);

/// Re-indexes CVR ballots parsed from their own file onto the contest roster.
/// Throws std::invalid_argument naming any candidate absent from the roster.
std::vector<Ballot> align_cvrs(const Contest& cvrs, const Contest& contest);

struct SimulateOptions {
  std::string ballots;
  std::string reported_winner;
  bool runner_up = false;
  AuditConfig config;
  std::size_t reps = 1000;
  std::uint64_t seed = 1;
  std::optional<std::string> cvrs;
  bool fixed_weights = false;
  std::optional<std::string> permute_labels;
  std::string out_dir;
  std::size_t threads = 0;
  FormatChoice format = FormatChoice::Auto;
};

SimSummary run_simulate(const SimulateOptions& options, std::ostream& log);

}  // namespace awaire::cli
