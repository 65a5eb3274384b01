#include "awaire/requirements.hpp"

#include <map>
#include <stdexcept>

namespace awaire {

namespace {

// Twice the assorter value, so sums stay integral.
std::size_t half_units(const DBRequirement& req, const Ballot& ballot) {
  const auto fp = first_preference(ballot, req.standing);
  if (fp && *fp == req.lower) return 2;
  if (fp && *fp == req.higher) return 0;
  return 1;
}

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

std::vector<DBRequirement> requirements_for_order(const EliminationOrder& order) {
  const std::size_t n = order.size();
  std::vector<DBRequirement> out;
  out.reserve(n * (n - 1) / 2);
  for (std::size_t k = n - 1; k-- > 0;) {
    StandingSet standing = 0;
    for (std::size_t m = k; m < n; ++m) standing |= singleton(order.order[m]);
    for (std::size_t m = n - 1; m > k; --m) {
      out.push_back({order.order[m], order.order[k], standing});
    }
  }
  return out;
}

double assorter_mean(const DBRequirement& req, std::span<const Ballot> ballots) {
  if (ballots.empty()) throw std::invalid_argument("no ballots");
  std::size_t units = 0;
  for (const auto& b : ballots) units += half_units(req, b);
  return static_cast<double>(units) / (2.0 * static_cast<double>(ballots.size()));
}

bool requirement_holds(const DBRequirement& req, const Contest& contest) {
  std::size_t units = 0;
  for (const auto& b : contest.ballots()) units += half_units(req, b);
  return units < contest.num_ballots();
}

RequirementPool build_pool(const AltOrderSet& alt_orders) {
  if (alt_orders.orders.empty()) throw std::invalid_argument("no alt-orders");
  RequirementPool pool;
  std::map<DBRequirement, std::size_t> index;
  std::map<StandingSet, std::size_t> standing_index;
  pool.per_order.reserve(alt_orders.size());
  for (const auto& order : alt_orders.orders) {
    auto& refs = pool.per_order.emplace_back();
    for (const auto& req : requirements_for_order(order)) {
      auto [it, inserted] = index.try_emplace(req, pool.requirements.size());
      if (inserted) {
        pool.requirements.push_back(req);
        auto [s, fresh] = standing_index.try_emplace(req.standing, pool.standings.size());
        if (fresh) pool.standings.push_back(req.standing);
        pool.standing_index.push_back(s->second);
      }
      refs.push_back(it->second);
    }
  }
  return pool;
}

std::size_t max_pool_size(std::size_t num_candidates) {
  std::size_t total = 0;
  for (std::size_t s = 2; s <= num_candidates; ++s) {
    total += binomial(num_candidates, s) * s * (s - 1);
  }
  return total;
}

std::string format_standing(StandingSet standing,
                            const std::vector<Candidate>& candidates) {
  std::string out = "{";
  bool first = true;
  for (const auto& c : candidates) {
    if (!contains(standing, c.id)) continue;
    if (!first) out += ',';
    out += c.name;
    first = false;
  }
  return out + "}";
}

std::string describe(const DBRequirement& req,
                     const std::vector<Candidate>& candidates) {
  return "DB " + candidates.at(req.higher).name + ">" +
         candidates.at(req.lower).name + " | S=" +
         format_standing(req.standing, candidates);
}

}  // namespace awaire
