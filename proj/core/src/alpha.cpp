#include "awaire/alpha.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace awaire {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void AlphaConfig::validate() const {
  if (!(mu0 > 0.0 && mu0 < 1.0)) {
    throw std::invalid_argument("mu0 must lie in (0, 1)");
  }
  if (!(eta0 > mu0 && eta0 <= 1.0)) {
    throw std::invalid_argument("eta0 must lie in (mu0, 1]");
  }
  if (d == 0) throw std::invalid_argument("d must be positive");
}

AlphaState::AlphaState(std::size_t population, const AlphaConfig& config)
    : config_(config), population_(population), mu_(config.mu0) {
  if (population == 0) throw std::invalid_argument("population must be positive");
  config_.validate();
}

double AlphaState::epsilon() const {
  const double weight = static_cast<double>(config_.d + next_ - 1);
  return (config_.eta0 - config_.mu0) / (2.0 * std::sqrt(weight));
}

double AlphaState::shrinkage_eta() const {
  const double weight = static_cast<double>(config_.d + next_ - 1);
  const double shrunk = (static_cast<double>(config_.d) * config_.eta0 + sum_) / weight;
  return std::min(std::max(shrunk, mu_ + epsilon()), 1.0);
}

double AlphaState::step(double x) {
  if (exhausted()) throw std::logic_error("ALPHA population exhausted");
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::invalid_argument("assorter value outside [0, 1]");
  }

  double e = 1.0;
  if (saturated_) {
    e = kInf;
  } else if (mu_ >= 1.0) {
    e = 1.0;
  } else if (mu_ <= 0.0) {
    e = x > 0.0 ? kInf : 1.0;
  } else if (x == mu_) {
    e = 1.0;
  } else {
    const double eta = shrinkage_eta();
    e = (x / mu_ * (eta - mu_) + (1.0 - eta)) / (1.0 - mu_);
  }

  sum_ += x;
  ++next_;
  if (!saturated_ &&
      sum_ > static_cast<double>(population_) * config_.mu0) {
    saturated_ = true;
  }
  if (saturated_) {
    e = kInf;
    log_m_ = kInf;
  } else {
    log_m_ += std::log(e);
  }
  if (!exhausted()) {
    mu_ = (static_cast<double>(population_) * config_.mu0 - sum_) /
          static_cast<double>(population_ - next_ + 1);
  }
  return e;
}

}  // namespace awaire
