#include <csignal>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "awaire/service.hpp"
#include "awaire/session.hpp"
#include "commands.hpp"

using namespace awaire;

namespace {

AuditService* g_service = nullptr;

void on_signal(int) {
  if (g_service) g_service->stop();
}

void add_config_options(CLI::App& cmd, AuditConfig& config, std::string& scheme) {
  cmd.add_option("--alpha", config.risk_limit, "Risk limit")->capture_default_str();
  cmd.add_option("--scheme", scheme, "Weighting scheme: linear, quadratic, largest, fixed")
      ->capture_default_str();
  cmd.add_option("--d", config.alpha.d, "ALPHA shrinkage weight")->capture_default_str();
  cmd.add_option("--eta0", config.alpha.eta0, "ALPHA initial estimate")->capture_default_str();
  cmd.add_option("--update-every", config.update_every, "Draws between weight updates")
      ->capture_default_str();
  cmd.add_option("--max-candidates", config.max_candidates, "Alt-order enumeration limit")
      ->capture_default_str();
}

int run_audit_prompt(SessionStore& store, const Json& request) {
  const auto created = store.create(request);
  const std::string id = created["session_id"];
  std::cout << "session " << id << ": enter one ranking per line (e.g. A>B>C; blank line = "
               "blank ballot; 'quit' to stop)\n";
  Json status = created["status"];
  for (std::string line; std::getline(std::cin, line);) {
    if (line == "quit") break;
    try {
      status = store.submit(id, Json{{"ranking", line}});
    } catch (const std::exception& e) {
      std::cout << "rejected: " << e.what() << '\n';
      continue;
    }
    std::size_t rejected = 0;
    for (const auto& o : status["orders"]) rejected += o["rejected"].get<bool>() ? 1 : 0;
    const std::string decision = status["decision"];
    std::cout << "t=" << status["t"].get<std::size_t>() << " decision=" << decision
              << " rejected=" << rejected << '/' << status["orders"].size() << '\n';
    if (decision == "certified") {
      std::cout << "every alt-order rejected: reported winner confirmed, stop sampling\n";
      return 0;
    }
    if (decision == "full_count_needed") {
      std::cout << "all ballots inspected; full count order:";
      for (const auto& name : status["true_order"]) std::cout << ' ' << name.get<std::string>();
      std::cout << '\n';
      return 0;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-limiting audits of IRV contests without cast-vote records"};
  app.require_subcommand(1);

  std::string format = "auto";
  app.add_option("--format", format, "Ballot file format: auto, ranks, aggregated")
      ->capture_default_str();

  auto* check = app.add_subcommand("check", "Tabulate a ballot file");
  std::string check_file;
  check->add_option("ballots", check_file, "Ballot file")->required();

  auto* explain = app.add_subcommand("explain", "Dump the requirement pool with true means");
  std::string explain_file;
  std::string explain_winner;
  std::size_t explain_max = kDefaultMaxCandidates;
  explain->add_option("ballots", explain_file, "Ballot file")->required();
  explain->add_option("--reported-winner", explain_winner,
                      "Reported winner (default: tabulated winner)");
  explain->add_option("--max-candidates", explain_max, "Alt-order enumeration limit");

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo audit replications");
  cli::SimulateOptions sim;
  std::string sim_scheme = "largest";
  simulate->add_option("--ballots", sim.ballots, "Ballot file")->required();
  simulate->add_option("--reported-winner", sim.reported_winner,
                       "Reported winner (default: tabulated winner)");
  simulate->add_flag("--runner-up", sim.runner_up,
                     "Report the runner-up (second-to-last eliminated) as winner");
  add_config_options(*simulate, sim.config, sim_scheme);
  simulate->add_option("--reps", sim.reps, "Replications")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  simulate->add_option("--cvrs", sim.cvrs, "CVR file used to tune weights and eta0");
  simulate->add_flag("--fixed-weights", sim.fixed_weights, "Keep starting weights fixed");
  simulate->add_option("--permute-labels", sim.permute_labels,
                       "Label map applied to the CVRs, e.g. \"1,0,2\"");
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");
  simulate->add_option("--out", sim.out_dir, "Output directory")->required();

  auto* serve = app.add_subcommand("serve", "Run the live-audit HTTP service");
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string data_dir;
  serve->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--host", host, "Bind address")->capture_default_str();
  serve->add_option("--data", data_dir, "Session log directory")->required();

  auto* audit = app.add_subcommand("audit", "Run a live audit at the terminal");
  AuditConfig audit_config;
  std::string audit_scheme = "largest";
  std::string audit_candidates;
  std::string audit_winner;
  std::size_t audit_total = 0;
  std::string audit_data;
  audit->add_option("--candidates", audit_candidates, "Comma-separated roster")->required();
  audit->add_option("--total-ballots", audit_total, "Ballots cast (B)")->required();
  audit->add_option("--reported-winner", audit_winner, "Reported winner")->required();
  audit->add_option("--data", audit_data, "Persist the session log in this directory");
  add_config_options(*audit, audit_config, audit_scheme);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto fmt = cli::parse_format_choice(format);
    if (check->parsed()) {
      const auto contest = cli::load_contest(check_file, fmt);
      cli::print_check(std::cout, contest, tabulate(contest));
    } else if (explain->parsed()) {
      const auto contest = cli::load_contest(explain_file, fmt);
      const CandidateId winner = explain_winner.empty() ? tabulate(contest).order.winner()
                                                        : contest.id_of(explain_winner);
      cli::print_explain(std::cout, contest, winner, explain_max);
    } else if (simulate->parsed()) {
      sim.config.scheme = parse_weight_scheme(sim_scheme);
      sim.format = fmt;
      cli::run_simulate(sim, std::cerr);
    } else if (serve->parsed()) {
      SessionStore store{std::filesystem::path(data_dir)};
      AuditService service(store);
      const int bound = service.bind(host, port);
      if (bound < 0) {
        std::cerr << "cannot bind " << host << ':' << port << '\n';
        return 1;
      }
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ':' << bound << std::endl;
      service.listen();
      g_service = nullptr;
    } else if (audit->parsed()) {
      audit_config.scheme = parse_weight_scheme(audit_scheme);
      Json names = Json::array();
      std::stringstream in(audit_candidates);
      for (std::string name; std::getline(in, name, ',');) names.push_back(name);
      Json request;
      request["ballot_manifest"] = {{"total_ballots", audit_total}, {"candidates", names}};
      request["reported_winner"] = audit_winner;
      request["config"] = {{"alpha", audit_config.risk_limit},
                           {"scheme", std::string(to_string(audit_config.scheme))},
                           {"update_every", audit_config.update_every},
                           {"eta0", audit_config.alpha.eta0},
                           {"d", audit_config.alpha.d}};
      std::optional<std::filesystem::path> dir;
      if (!audit_data.empty()) dir = audit_data;
      SessionStore store(dir);
      return run_audit_prompt(store, request);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
