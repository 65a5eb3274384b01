#pragma once

#include <cstddef>

namespace awaire {

struct AlphaConfig {
  /// Initial guess of the assorter mean; must exceed mu0.
  double eta0 = 0.52;
  /// Shrinkage weight, in pseudo-observations.
  std::size_t d = 50;
  /// Largest population mean allowed under the null.
  double mu0 = 0.5;

  /// Throws std::invalid_argument.
  void validate() const;

  bool operator==(const AlphaConfig&) const = default;
};

/// ALPHA test supermartingale for "population mean <= mu0" under sampling
/// without replacement, accumulated in the natural-log domain.
///
/// The null mean is recomputed after every draw from the values already
/// seen. Three boundary regimes are handled without dividing by zero:
///  - the running sum exceeds B * mu0: the null is impossible, the state
///    saturates and log_m() becomes +inf;
///  - the remaining null mean reaches 1: the null can no longer fail, so
///    every further factor is 1;
///  - the remaining null mean is exactly 0: a zero draw has factor 1 and any
///    positive draw saturates.
class AlphaState {
 public:
  /// Throws std::invalid_argument for population == 0 or an invalid config.
  AlphaState(std::size_t population, const AlphaConfig& config);

  std::size_t population() const { return population_; }
  /// 1-based index of the next draw.
  std::size_t next_draw() const { return next_; }
  std::size_t draws() const { return next_ - 1; }
  bool exhausted() const { return next_ > population_; }

  double mu() const { return mu_; }
  double running_sum() const { return sum_; }
  double log_m() const { return log_m_; }
  bool saturated() const { return saturated_; }
  const AlphaConfig& config() const { return config_; }

  /// Truncated-shrinkage estimate for the next draw, in (mu, 1].
  double shrinkage_eta() const;
  double epsilon() const;

  /// Consumes assorter value `x` for the next draw and returns the factor
  /// multiplied into M (+inf if the null just became impossible).
  /// Throws std::invalid_argument for x outside [0, 1] and std::logic_error
  /// once the population is exhausted.
  double step(double x);

 private:
  AlphaConfig config_;
  std::size_t population_;
  std::size_t next_ = 1;
  double mu_;
  double sum_ = 0.0;
  double log_m_ = 0.0;
  bool saturated_ = false;
};

}  // namespace awaire
