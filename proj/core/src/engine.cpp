#include "awaire/engine.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <stdexcept>
#include <string>

namespace awaire {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string lower(std::string_view text) {
  std::string out(text);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

}  // namespace

std::string_view to_string(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::Linear: return "linear";
    case WeightScheme::Quadratic: return "quadratic";
    case WeightScheme::Largest: return "largest";
    case WeightScheme::Fixed: return "fixed";
  }
  return "?";
}

WeightScheme parse_weight_scheme(std::string_view text) {
  const auto s = lower(text);
  if (s == "linear") return WeightScheme::Linear;
  if (s == "quadratic") return WeightScheme::Quadratic;
  if (s == "largest") return WeightScheme::Largest;
  if (s == "fixed") return WeightScheme::Fixed;
  throw std::invalid_argument("unknown weight scheme '" + std::string(text) + "'");
}

std::string_view to_string(Decision decision) {
  switch (decision) {
    case Decision::Ongoing: return "ongoing";
    case Decision::Certified: return "certified";
    case Decision::FullCountNeeded: return "full_count_needed";
  }
  return "?";
}

Decision parse_decision(std::string_view text) {
  if (text == "ongoing") return Decision::Ongoing;
  if (text == "certified") return Decision::Certified;
  if (text == "full_count_needed") return Decision::FullCountNeeded;
  throw std::invalid_argument("unknown decision '" + std::string(text) + "'");
}

void AuditConfig::validate() const {
  if (!(risk_limit > 0.0 && risk_limit < 1.0)) {
    throw std::invalid_argument("risk limit must lie in (0, 1)");
  }
  if (update_every == 0) throw std::invalid_argument("update_every must be >= 1");
  alpha.validate();
}

void scheme_weights(WeightScheme scheme, std::span<const double> log_values,
                    std::span<double> weights) {
  if (log_values.size() != weights.size()) {
    throw std::invalid_argument("one weight per base value required");
  }
  if (scheme == WeightScheme::Fixed || log_values.empty()) return;
  const double top = *std::max_element(log_values.begin(), log_values.end());
  for (std::size_t k = 0; k < log_values.size(); ++k) {
    const double lm = log_values[k];
    double& w = weights[k];
    if (top == -kInf) {
      w = 0.0;
    } else if (scheme == WeightScheme::Largest || top == kInf) {
      w = lm == top ? 1.0 : 0.0;
    } else if (scheme == WeightScheme::Linear) {
      w = std::exp(lm - top);
    } else {
      w = std::exp(2.0 * (lm - top));
    }
  }
}

TuningPlan tune_from_cvrs(std::span<const Ballot> cvrs, const RequirementPool& pool,
                          const AltOrderSet& alt_orders, const AuditConfig& config) {
  if (cvrs.empty()) throw std::invalid_argument("no CVRs supplied");
  for (const auto& cvr : cvrs) {
    for (const CandidateId c : cvr.ranking) {
      if (c >= alt_orders.num_candidates) {
        throw std::invalid_argument("CVR ranks candidate id " + std::to_string(c) +
                                    " outside the roster");
      }
    }
    validate_ballot(cvr, alt_orders.num_candidates);
  }

  TuningPlan plan;
  plan.reported_means.reserve(pool.size());
  plan.eta0.reserve(pool.size());
  for (const auto& req : pool.requirements) {
    const double mean = assorter_mean(req, cvrs);
    plan.reported_means.push_back(mean);
    plan.eta0.push_back(mean > config.alpha.mu0 ? mean : config.alpha.eta0);
  }
  plan.starting_weights.reserve(pool.per_order.size());
  for (const auto& refs : pool.per_order) {
    double best = -kInf;
    for (const auto r : refs) best = std::max(best, plan.reported_means[r]);
    auto& w = plan.starting_weights.emplace_back();
    for (const auto r : refs) w.push_back(plan.reported_means[r] == best ? 1.0 : 0.0);
  }
  return plan;
}

Audit::Audit(RequirementPool pool, AltOrderSet alt_orders, std::size_t population,
             AuditConfig config, std::optional<TuningPlan> tuning)
    : pool_(std::move(pool)),
      alt_orders_(std::move(alt_orders)),
      population_(population),
      config_(config),
      threshold_log_(config.threshold_log()),
      remaining_(alt_orders_.size()) {
  config_.validate();
  if (population_ == 0) throw std::invalid_argument("population must be positive");
  if (alt_orders_.size() == 0 || pool_.per_order.size() != alt_orders_.size()) {
    throw std::invalid_argument("requirement pool does not match alt-orders");
  }
  for (std::size_t i = 0; i < alt_orders_.size(); ++i) {
    const auto expected = requirements_for_order(alt_orders_.orders[i]);
    const auto& refs = pool_.per_order[i];
    if (refs.size() != expected.size()) {
      throw std::invalid_argument("requirement pool does not match alt-orders");
    }
    for (std::size_t k = 0; k < refs.size(); ++k) {
      if (refs[k] >= pool_.size() || pool_.requirements[refs[k]] != expected[k]) {
        throw std::invalid_argument("requirement pool does not match alt-orders");
      }
    }
  }

  if (tuning) {
    if (tuning->eta0.size() != pool_.size() ||
        tuning->starting_weights.size() != alt_orders_.size()) {
      throw std::invalid_argument("tuning plan does not match requirement pool");
    }
  }

  base_.reserve(pool_.size());
  for (std::size_t r = 0; r < pool_.size(); ++r) {
    AlphaConfig ac = config_.alpha;
    if (tuning) ac.eta0 = tuning->eta0[r];
    base_.emplace_back(population_, ac);
  }

  live_refs_.assign(pool_.size(), 0);
  trackers_.resize(alt_orders_.size());
  for (std::size_t i = 0; i < trackers_.size(); ++i) {
    auto& tracker = trackers_[i];
    const auto& refs = pool_.per_order[i];
    if (tuning) {
      tracker.weights = tuning->starting_weights[i];
      if (tracker.weights.size() != refs.size()) {
        throw std::invalid_argument("tuning plan does not match requirement pool");
      }
      for (const double w : tracker.weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
          throw std::invalid_argument("starting weights must be nonnegative");
        }
      }
    } else {
      tracker.weights.assign(refs.size(), 1.0);
    }
    set_weight_sum(tracker);
    if (!(tracker.weight_sum > 0.0)) {
      throw std::invalid_argument("starting weights must have a positive sum");
    }
    for (const auto r : refs) ++live_refs_[r];
  }

  factor_.assign(pool_.size(), 1.0);
  first_pref_.assign(pool_.standings.size(), -1);
  observed_.reserve(population_);
}

Audit Audit::for_contest(std::size_t num_candidates, CandidateId reported_winner,
                         std::size_t population, const AuditConfig& config,
                         std::optional<TuningPlan> tuning) {
  auto alt = enumerate_alt_orders(num_candidates, reported_winner, config.max_candidates);
  auto pool = build_pool(alt);
  return Audit(std::move(pool), std::move(alt), population, config, std::move(tuning));
}

void Audit::set_weight_sum(Tracker& tracker) {
  double sum = 0.0;
  for (const double w : tracker.weights) sum += w;
  tracker.weight_sum = sum;
}

void Audit::retire(std::size_t order) {
  for (const auto r : pool_.per_order[order]) --live_refs_[r];
  live_dirty_ = true;
}

void Audit::compact_live() {
  live_orders_.clear();
  for (std::size_t i = 0; i < trackers_.size(); ++i) {
    if (trackers_[i].live()) live_orders_.push_back(i);
  }
  live_requirements_.clear();
  std::vector<bool> standing_used(pool_.standings.size(), false);
  for (std::size_t r = 0; r < pool_.size(); ++r) {
    if (live_refs_[r] == 0) continue;
    live_requirements_.push_back(r);
    standing_used[pool_.standing_index[r]] = true;
  }
  live_standings_.clear();
  for (std::size_t s = 0; s < standing_used.size(); ++s) {
    if (standing_used[s]) live_standings_.push_back(s);
  }
  live_dirty_ = false;
}

Decision Audit::observe(const Ballot& ballot) {
  if (decision_ != Decision::Ongoing) {
    throw std::logic_error("audit already reached a decision");
  }
  validate_ballot(ballot, alt_orders_.num_candidates);

  if (live_dirty_) compact_live();

  for (const auto s : live_standings_) {
    const auto fp = first_preference(ballot, pool_.standings[s]);
    first_pref_[s] = fp ? static_cast<int>(*fp) : -1;
  }
  bool new_zero = false;
  for (const auto r : live_requirements_) {
    const auto& req = pool_.requirements[r];
    const int fp = first_pref_[pool_.standing_index[r]];
    const double x = fp == req.lower ? 1.0 : (fp == req.higher ? 0.0 : 0.5);
    factor_[r] = base_[r].step(x);
    if (factor_[r] == 0.0) new_zero = true;
  }
  ++t_;
  observed_.push_back(ballot);

  // Under adaptive schemes a saturated requirement would take all the weight
  // at the next update, so its orders are rejected outright.
  const bool adaptive = config_.scheme != WeightScheme::Fixed;
  for (const auto i : live_orders_) {
    auto& tracker = trackers_[i];
    const auto& refs = pool_.per_order[i];

    bool certain = false;
    double weighted = 0.0;
    for (std::size_t k = 0; k < refs.size(); ++k) {
      const double w = tracker.weights[k];
      const double e = factor_[refs[k]];
      if (e == kInf && (w > 0.0 || adaptive)) {
        certain = true;
        break;
      }
      if (w == 0.0) continue;
      weighted += w * e;
    }
    if (certain) {
      tracker.log_e = kInf;
    } else {
      tracker.log_e += std::log(weighted / tracker.weight_sum);
    }
    if (tracker.log_e >= threshold_log_) {
      tracker.rejected = true;
      --remaining_;
      retire(i);
      continue;
    }
    if (tracker.log_e == -kInf ||
        (new_zero && std::all_of(refs.begin(), refs.end(), [&](std::size_t r) {
           return base_[r].log_m() == -kInf;
         }))) {
      tracker.unrejectable = true;
      ++unrejectable_;
      retire(i);
    }
  }
  if (remaining_ == 0) {
    decision_ = Decision::Certified;
  } else if (t_ == population_) {
    decision_ = Decision::FullCountNeeded;
    true_order_ = tabulate(observed_, alt_orders_.num_candidates,
                           TieBreak::ascending(alt_orders_.num_candidates))
                      .order;
  } else if (t_ % config_.update_every == 0) {
    reweigh();
  }
  return decision_;
}

void Audit::reweigh() {
  if (config_.scheme == WeightScheme::Fixed) return;
  if (live_dirty_) compact_live();
  std::vector<double> logs;
  for (const auto i : live_orders_) {
    auto& tracker = trackers_[i];
    if (!tracker.live()) continue;
    const auto& refs = pool_.per_order[i];
    logs.clear();
    for (const auto r : refs) logs.push_back(base_[r].log_m());
    if (*std::max_element(logs.begin(), logs.end()) == -kInf) {
      tracker.unrejectable = true;
      ++unrejectable_;
      retire(i);
      continue;
    }
    scheme_weights(config_.scheme, logs, tracker.weights);
    set_weight_sum(tracker);
  }
}

AuditStatus Audit::status() const {
  AuditStatus s;
  s.t = t_;
  s.population = population_;
  s.decision = decision_;
  s.risk_limit = config_.risk_limit;
  s.threshold_log = threshold_log_;
  s.remaining = remaining_;
  s.orders.reserve(trackers_.size());
  for (std::size_t i = 0; i < trackers_.size(); ++i) {
    const auto& tracker = trackers_[i];
    s.orders.push_back({alt_orders_.orders[i], tracker.log_e, tracker.rejected,
                        tracker.unrejectable});
  }
  s.requirements.reserve(pool_.size());
  for (std::size_t r = 0; r < pool_.size(); ++r) {
    s.requirements.push_back({pool_.requirements[r], base_[r].log_m(), base_[r].saturated()});
  }
  s.true_order = true_order_;
  return s;
}

}  // namespace awaire
