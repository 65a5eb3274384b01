#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "awaire/alpha.hpp"
#include "awaire/contest.hpp"
#include "awaire/requirements.hpp"
#include "awaire/tabulation.hpp"

namespace awaire {

enum class WeightScheme { Linear, Quadratic, Largest, Fixed };

std::string_view to_string(WeightScheme scheme);
/// Accepts "linear", "quadratic", "largest", "fixed" (any case).
WeightScheme parse_weight_scheme(std::string_view text);

enum class Decision { Ongoing, Certified, FullCountNeeded };

/// "ongoing", "certified", "full_count_needed".
std::string_view to_string(Decision decision);
Decision parse_decision(std::string_view text);

struct AuditConfig {
  double risk_limit = 0.01;
  WeightScheme scheme = WeightScheme::Largest;
  /// Weights are recomputed after every `update_every` draws.
  std::size_t update_every = 25;
  AlphaConfig alpha;
  std::size_t max_candidates = kDefaultMaxCandidates;

  void validate() const;
  /// log(1 / risk_limit).
  double threshold_log() const { return -std::log(risk_limit); }

  bool operator==(const AuditConfig&) const = default;
};

/// Weights for one alt-order from the natural logs of its base values.
/// Linear is proportional to the base value, Quadratic to its square, and
/// Largest puts weight 1 on every maximal base. Linear and Quadratic are
/// scaled so the largest weight is 1; a base at +inf takes all the mass.
/// Fixed leaves `weights` unchanged. Every weight is 0 when every log value is
/// -inf.
void scheme_weights(WeightScheme scheme, std::span<const double> log_values,
                    std::span<double> weights);

/// Per-order starting weights and per-requirement eta0 derived from CVRs.
struct TuningPlan {
  /// starting_weights[i][k] is the weight for pool.per_order[i][k].
  std::vector<std::vector<double>> starting_weights;
  /// eta0 for each pool requirement.
  std::vector<double> eta0;
  /// Assorter mean over the CVRs, per pool requirement.
  std::vector<double> reported_means;
};

/// Derives starting weights (1 on each order's easiest requirement(s), 0
/// elsewhere) and per-requirement eta0 (the reported mean when above mu0,
/// else the configured default). Throws std::invalid_argument when a CVR
/// ranks a candidate outside the roster.
TuningPlan tune_from_cvrs(std::span<const Ballot> cvrs, const RequirementPool& pool,
                          const AltOrderSet& alt_orders, const AuditConfig& config);

struct OrderStatus {
  EliminationOrder order;
  double log_e = 0.0;
  bool rejected = false;
  /// The intersection value, or every base supermartingale for the order, is
  /// at zero; it cannot be rejected before the full count.
  bool unrejectable = false;

  bool operator==(const OrderStatus&) const = default;
};

struct RequirementStatus {
  DBRequirement requirement;
  double log_m = 0.0;
  bool saturated = false;

  bool operator==(const RequirementStatus&) const = default;
};

struct AuditStatus {
  std::size_t t = 0;
  std::size_t population = 0;
  Decision decision = Decision::Ongoing;
  double risk_limit = 0.0;
  double threshold_log = 0.0;
  std::size_t remaining = 0;
  std::vector<OrderStatus> orders;
  std::vector<RequirementStatus> requirements;
  /// Set once every ballot has been observed.
  std::optional<EliminationOrder> true_order;

  bool operator==(const AuditStatus&) const = default;
};

/// Sequential ballot-polling audit over every alt-order at once. Each
/// alt-order is tested with an intersection supermartingale: the product over
/// draws of a weighted average of its requirements' ALPHA factors, with
/// weights fixed before each draw. A base supermartingale is stepped only
/// while some unrejected alt-order references it.
class Audit {
 public:
  /// Throws std::invalid_argument for an invalid config, a pool that was not
  /// built from `alt_orders`, or malformed tuning.
  Audit(RequirementPool pool, AltOrderSet alt_orders, std::size_t population,
        AuditConfig config, std::optional<TuningPlan> tuning = std::nullopt);

  /// Convenience: alt-orders and pool for `num_candidates` and the winner.
  static Audit for_contest(std::size_t num_candidates, CandidateId reported_winner,
                           std::size_t population, const AuditConfig& config,
                           std::optional<TuningPlan> tuning = std::nullopt);

  /// Feeds the next sampled ballot. Throws std::logic_error once decided.
  Decision observe(const Ballot& ballot);

  /// Recomputes every live order's weights from current base values.
  /// A no-op under the Fixed scheme.
  void reweigh();

  AuditStatus status() const;

  Decision decision() const { return decision_; }
  std::size_t draws() const { return t_; }
  std::size_t population() const { return population_; }
  std::size_t remaining() const { return remaining_; }
  /// True once some surviving order is unrejectable.
  bool certification_impossible() const { return unrejectable_ > 0; }

  const AuditConfig& config() const { return config_; }
  const RequirementPool& pool() const { return pool_; }
  const AltOrderSet& alt_orders() const { return alt_orders_; }
  const AlphaState& base(std::size_t requirement) const { return base_[requirement]; }
  const std::vector<double>& weights(std::size_t order) const {
    return trackers_[order].weights;
  }
  double log_e(std::size_t order) const { return trackers_[order].log_e; }
  bool rejected(std::size_t order) const { return trackers_[order].rejected; }
  const std::optional<EliminationOrder>& true_order() const { return true_order_; }

 private:
  struct Tracker {
    std::vector<double> weights;
    double weight_sum = 0.0;
    double log_e = 0.0;
    bool rejected = false;
    bool unrejectable = false;

    bool live() const { return !rejected && !unrejectable; }
  };

  void set_weight_sum(Tracker& tracker);
  void retire(std::size_t order);
  void compact_live();

  RequirementPool pool_;
  AltOrderSet alt_orders_;
  std::size_t population_;
  AuditConfig config_;
  double threshold_log_;

  std::vector<AlphaState> base_;
  std::vector<std::size_t> live_refs_;
  std::vector<Tracker> trackers_;

  std::vector<double> factor_;
  std::vector<int> first_pref_;
  // Indices of live trackers, stepped requirements and the standing sets
  // they use; rebuilt lazily after a retirement.
  std::vector<std::size_t> live_orders_;
  std::vector<std::size_t> live_requirements_;
  std::vector<std::size_t> live_standings_;
  bool live_dirty_ = true;

  std::size_t t_ = 0;
  std::size_t remaining_;
  std::size_t unrejectable_ = 0;
  Decision decision_ = Decision::Ongoing;
  std::vector<Ballot> observed_;
  std::optional<EliminationOrder> true_order_;
};

}  // namespace awaire
