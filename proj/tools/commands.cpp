#include "commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "awaire/requirements.hpp"
#include "awaire/tabulation.hpp"

namespace awaire::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

FormatChoice parse_format_choice(const std::string& text) {
  if (text == "auto") return FormatChoice::Auto;
  if (text == "ranks" || text == "csv_ranks") return FormatChoice::Ranks;
  if (text == "aggregated" || text == "aggregated_csv") return FormatChoice::Aggregated;
  throw std::invalid_argument("unknown ballot format '" + text + "'");
}

Contest load_contest(const std::string& path, FormatChoice format) {
  const auto bytes = read_file(path);
  BallotFormat f = BallotFormat::CsvRanks;
  switch (format) {
    case FormatChoice::Auto: f = detect_format(bytes); break;
    case FormatChoice::Ranks: f = BallotFormat::CsvRanks; break;
    case FormatChoice::Aggregated: f = BallotFormat::AggregatedCsv; break;
  }
  return parse_ballot_file(bytes, f);
}

void print_check(std::ostream& out, const Contest& contest, const EliminationResult& result) {
  const auto& candidates = contest.candidates();
  out << "candidates:";
  for (const auto& c : candidates) out << ' ' << c.name;
  out << "\nballots: " << contest.num_ballots() << '\n';

  const std::size_t rounds = result.round_tallies.size();
  for (std::size_t r = 0; r < rounds; ++r) {
    const auto& tally = result.round_tallies[r];
    const auto standing = result.round_standing[r];
    std::size_t counted = 0;
    out << "round " << r + 1 << ':';
    for (const auto& c : candidates) {
      out << ' ' << c.name << '=';
      if (contains(standing, c.id)) {
        out << tally[c.id];
        counted += tally[c.id];
      } else {
        out << '-';
      }
    }
    out << " exhausted=" << contest.num_ballots() - counted << " | ";
    if (r + 1 < rounds) {
      out << "eliminated " << contest.name_of(result.order.order[r]);
    } else {
      out << "winner " << contest.name_of(result.order.winner());
    }
    out << '\n';
  }
  out << "elimination order:";
  for (const auto c : result.order.order) out << ' ' << contest.name_of(c);
  out << "\nwinner: " << contest.name_of(result.order.winner()) << '\n';
  out << "ties: " << result.tie_events.size() << '\n';
  for (const auto& tie : result.tie_events) {
    out << "tie round " << tie.round + 1 << ": ";
    for (std::size_t k = 0; k < tie.tied.size(); ++k) {
      if (k > 0) out << ',';
      out << contest.name_of(tie.tied[k]);
    }
    out << " -> " << contest.name_of(tie.eliminated) << '\n';
  }
}

void print_explain(std::ostream& out, const Contest& contest, CandidateId reported_winner,
                   std::size_t max_candidates) {
  const auto alt = enumerate_alt_orders(contest.num_candidates(), reported_winner, max_candidates);
  const auto pool = build_pool(alt);
  for (const auto& req : pool.requirements) {
    out << describe(req, contest.candidates())
        << " | true_mean=" << fixed6(assorter_mean(req, contest.ballots())) << '\n';
  }
}

std::vector<CandidateId> parse_label_map(const std::string& text, std::size_t num_candidates) {
  std::vector<CandidateId> perm;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      const int v = std::stoi(item);
      if (v < 0 || static_cast<std::size_t>(v) >= num_candidates) throw std::out_of_range("id");
      perm.push_back(static_cast<CandidateId>(v));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bad label map entry '" + item + "'");
    }
  }
  if (perm.size() != num_candidates) {
    throw std::invalid_argument("label map must list " + std::to_string(num_candidates) + " ids");
  }
  return perm;
}

std::vector<Ballot> align_cvrs(const Contest& cvrs, const Contest& contest) {
  std::vector<CandidateId> remap;
  for (const auto& c : cvrs.candidates()) {
    const auto id = contest.find(c.name);
    if (!id) throw std::invalid_argument("CVR candidate '" + c.name + "' is not on the roster");
    remap.push_back(*id);
  }
  std::vector<Ballot> out;
  out.reserve(cvrs.num_ballots());
  for (const auto& b : cvrs.ballots()) {
    Ballot aligned;
    for (const auto c : b.ranking) aligned.ranking.push_back(remap[c]);
    out.push_back(std::move(aligned));
  }
  return out;
}

SimSummary run_simulate(const SimulateOptions& options, std::ostream& log) {
  const Contest contest = load_contest(options.ballots, options.format);
  CandidateId winner = 0;
  if (options.runner_up) {
    winner = runner_up(contest);
  } else if (!options.reported_winner.empty()) {
    winner = contest.id_of(options.reported_winner);
  } else {
    winner = tabulate(contest).order.winner();
  }

  AuditConfig config = options.config;
  if (options.fixed_weights) config.scheme = WeightScheme::Fixed;
  config.validate();

  std::optional<TuningPlan> tuning;
  if (options.cvrs || options.permute_labels) {
    std::vector<Ballot> cvrs =
        options.cvrs ? align_cvrs(load_contest(*options.cvrs, options.format), contest)
                     : contest.ballots();
    if (options.permute_labels) {
      const auto perm = parse_label_map(*options.permute_labels, contest.num_candidates());
      cvrs = permute_labels(cvrs, perm);
    }
    tuning = tune_for_contest(contest, winner, cvrs, config);
  }

  log << "auditing " << contest.num_ballots() << " ballots, reported winner "
      << contest.name_of(winner) << ", scheme " << to_string(config.scheme) << ", "
      << options.reps << " replications\n";
  const auto summary = run_replications(contest, winner, options.reps, options.seed, config,
                                        tuning, options.threads);

  std::filesystem::create_directories(options.out_dir);
  const auto dir = std::filesystem::path(options.out_dir);
  std::ofstream csv(dir / "trials.csv");
  write_trials_csv(csv, summary);
  std::ofstream json(dir / "summary.json");
  write_summary_json(json, summary);
  if (!csv || !json) throw std::runtime_error("cannot write results to '" + options.out_dir + "'");

  log << "mean sample size " << summary.mean_sample_size << ", certification rate "
      << summary.certification_rate << '\n';
  return summary;
}

}  // namespace awaire::cli
