#include "awaire/engine.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "oracle.hpp"

namespace {

using awaire::Audit;
using awaire::AuditConfig;
using awaire::Ballot;
using awaire::CandidateId;
using awaire::Decision;
using awaire::WeightScheme;
using ::testing::DoubleNear;
using ::testing::ElementsAre;
using ::testing::Pointwise;

constexpr double kInf = std::numeric_limits<double>::infinity();

AuditConfig with_scheme(WeightScheme scheme) {
  AuditConfig c;
  c.scheme = scheme;
  return c;
}

std::vector<double> weights_for(WeightScheme scheme, std::vector<double> logs) {
  std::vector<double> w(logs.size(), 7.0);
  awaire::scheme_weights(scheme, logs, w);
  return w;
}

TEST(AuditNew, EqualStartingWeights) {
  const auto audit = Audit::for_contest(4, 0, 1000, AuditConfig{});
  const auto status = audit.status();
  ASSERT_EQ(status.orders.size(), 18u);
  for (std::size_t i = 0; i < 18; ++i) {
    EXPECT_THAT(audit.weights(i), ElementsAre(1, 1, 1, 1, 1, 1));
    EXPECT_EQ(status.orders[i].log_e, 0.0);
    EXPECT_FALSE(status.orders[i].rejected);
  }
  EXPECT_EQ(status.decision, Decision::Ongoing);
  EXPECT_EQ(status.t, 0u);
  EXPECT_EQ(status.remaining, 18u);
  EXPECT_FALSE(status.true_order);
}

TEST(AuditNew, Threshold) {
  AuditConfig c;
  c.risk_limit = 0.01;
  EXPECT_DOUBLE_EQ(c.threshold_log(), std::log(100.0));
  EXPECT_DOUBLE_EQ(Audit::for_contest(3, 0, 10, c).status().threshold_log, std::log(100.0));
}

TEST(AuditNew, InvalidConfig) {
  AuditConfig c;
  c.risk_limit = 1.0;
  EXPECT_THROW(Audit::for_contest(3, 0, 10, c), std::invalid_argument);
  c.risk_limit = 0.0;
  EXPECT_THROW(Audit::for_contest(3, 0, 10, c), std::invalid_argument);
  c = AuditConfig{};
  c.update_every = 0;
  EXPECT_THROW(Audit::for_contest(3, 0, 10, c), std::invalid_argument);
  EXPECT_THROW(Audit::for_contest(3, 0, 0, AuditConfig{}), std::invalid_argument);
}

TEST(AuditNew, PoolMustMatchOrders) {
  auto alt = awaire::enumerate_alt_orders(3, 0);
  auto other = awaire::build_pool(awaire::enumerate_alt_orders(3, 1));
  EXPECT_THROW(Audit(other, alt, 10, AuditConfig{}), std::invalid_argument);
}

TEST(AuditNew, TuningShapeChecked) {
  auto alt = awaire::enumerate_alt_orders(3, 0);
  auto pool = awaire::build_pool(alt);
  awaire::TuningPlan plan;
  plan.eta0.assign(pool.size(), 0.52);
  plan.starting_weights.assign(alt.size(), {0.0, 0.0, 0.0});
  EXPECT_THROW(Audit(pool, alt, 10, AuditConfig{}, plan), std::invalid_argument);
  plan.starting_weights.assign(alt.size(), {1.0, 0.0});
  EXPECT_THROW(Audit(pool, alt, 10, AuditConfig{}, plan), std::invalid_argument);
  plan.starting_weights.assign(alt.size(), {0.0, 1.0, 0.0});
  const Audit audit(pool, alt, 10, AuditConfig{}, plan);
  EXPECT_THAT(audit.weights(0), ElementsAre(0, 1, 0));
}

TEST(SchemeWeights, BaseValuesTwoOneOne) {
  const std::vector<double> logs = {std::log(2.0), 0.0, 0.0};
  EXPECT_THAT(weights_for(WeightScheme::Linear, logs),
              Pointwise(DoubleNear(1e-12), std::vector<double>{1.0, 0.5, 0.5}));
  EXPECT_THAT(weights_for(WeightScheme::Quadratic, logs),
              Pointwise(DoubleNear(1e-12), std::vector<double>{1.0, 0.25, 0.25}));
  EXPECT_THAT(weights_for(WeightScheme::Largest, logs), ElementsAre(1, 0, 0));
  EXPECT_THAT(weights_for(WeightScheme::Fixed, logs), ElementsAre(7, 7, 7));
}

TEST(SchemeWeights, LargestTiesShare) {
  const double l2 = std::log(2.0);
  EXPECT_THAT(weights_for(WeightScheme::Largest, {l2, l2, 0.0}), ElementsAre(1, 1, 0));
}

TEST(SchemeWeights, SaturatedTakesAllMass) {
  for (auto s : {WeightScheme::Linear, WeightScheme::Quadratic, WeightScheme::Largest}) {
    EXPECT_THAT(weights_for(s, {0.0, kInf, 3.0}), ElementsAre(0, 1, 0));
  }
}

TEST(SchemeWeights, HugeValuesDoNotOverflow) {
  const auto w = weights_for(WeightScheme::Quadratic, {5000.0, 4999.0, -kInf});
  EXPECT_THAT(w, Pointwise(DoubleNear(1e-12), std::vector<double>{1.0, std::exp(-2.0), 0.0}));
  EXPECT_THAT(weights_for(WeightScheme::Linear, {-kInf, -kInf}), ElementsAre(0, 0));
}

// Each draw multiplies E by the weighted mean of the base factors, using the
// weights held before the draw.
TEST(Observe, IntersectionUpdateMatchesManualRecomputation) {
  std::mt19937_64 rng(31);
  for (auto scheme : {WeightScheme::Linear, WeightScheme::Quadratic, WeightScheme::Largest}) {
    AuditConfig config = with_scheme(scheme);
    config.update_every = 3;
    config.risk_limit = 1e-12;
    const int n = 4;
    const auto ballots = oracle::random_ballots(rng, n, 400);
    auto audit = Audit::for_contest(n, 0, ballots.size(), config);
    const auto& pool = audit.pool();
    for (std::size_t t = 0; t < 200; ++t) {
      std::vector<std::vector<double>> w;
      std::vector<double> before_log_e;
      std::vector<double> before_m;
      for (std::size_t i = 0; i < audit.alt_orders().size(); ++i) {
        w.push_back(audit.weights(i));
        before_log_e.push_back(audit.log_e(i));
      }
      for (std::size_t r = 0; r < pool.size(); ++r) before_m.push_back(audit.base(r).log_m());
      audit.observe(ballots[t]);
      for (std::size_t i = 0; i < audit.alt_orders().size(); ++i) {
        if (!std::isfinite(before_log_e[i]) || audit.rejected(i)) continue;
        const auto& refs = pool.per_order[i];
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < refs.size(); ++k) {
          if (w[i][k] == 0.0) continue;
          const double e = std::exp(audit.base(refs[k]).log_m() - before_m[refs[k]]);
          num += w[i][k] * e;
          den += w[i][k];
        }
        EXPECT_NEAR(audit.log_e(i) - before_log_e[i], std::log(num / den), 1e-9)
            << "order " << i << " t " << t;
      }
    }
  }
}

TEST(Observe, IdenticalFactorsGiveThatFactor) {
  // A blank ballot scores 1/2 = mu on every requirement at the first draw.
  for (auto scheme : {WeightScheme::Linear, WeightScheme::Quadratic, WeightScheme::Largest,
                      WeightScheme::Fixed}) {
    auto audit = Audit::for_contest(4, 0, 100, with_scheme(scheme));
    audit.observe(Ballot{});
    for (std::size_t i = 0; i < 18; ++i) EXPECT_EQ(audit.log_e(i), 0.0);
  }
}

TEST(Observe, SaturatedBaseRejectsOrder) {
  // C=2, winner 0: the single alt-order needs DB(1,0). Two ballots for 0 out
  // of three put the running sum above B/2.
  auto audit = Audit::for_contest(2, 0, 3, AuditConfig{});
  EXPECT_EQ(audit.observe(Ballot{{0}}), Decision::Ongoing);
  EXPECT_EQ(audit.observe(Ballot{{0}}), Decision::Certified);
  EXPECT_TRUE(audit.rejected(0));
  EXPECT_EQ(audit.log_e(0), kInf);
  EXPECT_THROW(audit.observe(Ballot{{0}}), std::logic_error);
}

// Order [0,1,2] references DB(2,1,{1,2}), DB(2,0,all), DB(1,0,all). Ballots
// [1] saturate the first after 6 of 10 draws.
TEST(Observe, SaturationUnderFixedWeightsNeedsPositiveWeight) {
  auto alt = awaire::enumerate_alt_orders(3, 0);
  auto pool = awaire::build_pool(alt);
  awaire::TuningPlan plan;
  plan.eta0.assign(pool.size(), 0.52);
  plan.starting_weights.assign(alt.size(), {1.0, 1.0, 1.0});
  plan.starting_weights[0] = {0.0, 1.0, 0.0};

  Audit fixed(pool, alt, 10, with_scheme(WeightScheme::Fixed), plan);
  Audit largest(pool, alt, 10, with_scheme(WeightScheme::Largest), plan);
  for (int k = 0; k < 6; ++k) {
    fixed.observe(Ballot{{1}});
    largest.observe(Ballot{{1}});
  }
  EXPECT_TRUE(fixed.base(pool.per_order[0][0]).saturated());
  EXPECT_FALSE(fixed.rejected(0));
  EXPECT_EQ(fixed.log_e(0), 0.0);
  EXPECT_TRUE(largest.rejected(0));
}

TEST(Observe, ZeroIntersectionIsUnrejectable) {
  // eta0 = 1 puts eta at 1 for the first draw, so a zero score zeroes the base.
  AuditConfig config = with_scheme(WeightScheme::Fixed);
  config.alpha.eta0 = 1.0;
  auto alt = awaire::enumerate_alt_orders(2, 0);
  auto pool = awaire::build_pool(alt);
  Audit audit(pool, alt, 50, config);
  audit.observe(Ballot{{1}});
  EXPECT_EQ(audit.log_e(0), -kInf);
  EXPECT_TRUE(audit.status().orders[0].unrejectable);
  EXPECT_TRUE(audit.certification_impossible());
  EXPECT_EQ(audit.decision(), Decision::Ongoing);
}

// Fixed weight on one requirement makes the intersection equal that base, bit
// for bit.
TEST(Observe, DegenerateWeightsMatchBase) {
  std::mt19937_64 rng(41);
  for (int stream = 0; stream < 20; ++stream) {
    const int n = 3 + stream % 2;
    const auto ballots = oracle::random_ballots(rng, n, 300);
    auto alt = awaire::enumerate_alt_orders(n, static_cast<CandidateId>(rng() % n));
    auto pool = awaire::build_pool(alt);
    awaire::TuningPlan plan;
    plan.eta0.assign(pool.size(), 0.52);
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < alt.size(); ++i) {
      const std::size_t k = rng() % pool.per_order[i].size();
      std::vector<double> w(pool.per_order[i].size(), 0.0);
      w[k] = 1.0;
      plan.starting_weights.push_back(w);
      chosen.push_back(pool.per_order[i][k]);
    }
    Audit audit(pool, alt, ballots.size(), with_scheme(WeightScheme::Fixed), plan);
    std::vector<bool> live(alt.size(), true);
    for (const auto& b : ballots) {
      if (audit.decision() != Decision::Ongoing) break;
      audit.observe(b);
      const auto status = audit.status();
      for (std::size_t i = 0; i < alt.size(); ++i) {
        if (!live[i]) continue;
        EXPECT_EQ(audit.log_e(i), audit.base(chosen[i]).log_m());
        live[i] = !status.orders[i].rejected && !status.orders[i].unrejectable;
      }
    }
  }
}

// Weights in force after k draws depend only on those k draws.
TEST(Observe, WeightsArePredictable) {
  std::mt19937_64 rng(43);
  for (auto scheme : {WeightScheme::Linear, WeightScheme::Quadratic, WeightScheme::Largest}) {
    AuditConfig config = with_scheme(scheme);
    config.update_every = 1;
    config.risk_limit = 1e-9;
    const auto prefix = oracle::random_ballots(rng, 4, 60);
    auto a = Audit::for_contest(4, 0, 200, config);
    auto b = Audit::for_contest(4, 0, 200, config);
    for (const auto& ballot : prefix) {
      a.observe(ballot);
      b.observe(ballot);
    }
    std::vector<std::vector<double>> snapshot;
    for (std::size_t i = 0; i < 18; ++i) snapshot.push_back(a.weights(i));
    for (std::size_t i = 0; i < 18; ++i) EXPECT_EQ(b.weights(i), snapshot[i]);

    a.observe(Ballot{{0}});
    b.observe(Ballot{{3, 2, 1}});
    // The draw just taken used the snapshot in both runs.
    bool diverged = false;
    for (std::size_t i = 0; i < 18; ++i) diverged = diverged || a.log_e(i) != b.log_e(i);
    EXPECT_TRUE(diverged);
  }
}

TEST(Observe, RejectionIsMonotone) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 20; ++trial) {
    auto ballots = oracle::random_ballots(rng, 4, 500);
    const auto truth = oracle::irv(oracle::rankings(ballots), 4);
    AuditConfig config = with_scheme(static_cast<WeightScheme>(trial % 4));
    config.risk_limit = 0.1;
    auto audit = Audit::for_contest(4, static_cast<CandidateId>(truth.order.back()),
                                    ballots.size(), config);
    std::vector<bool> was(18, false);
    std::size_t last_remaining = 18;
    for (const auto& b : ballots) {
      if (audit.observe(b) != Decision::Ongoing) break;
      for (std::size_t i = 0; i < 18; ++i) {
        if (was[i]) EXPECT_TRUE(audit.rejected(i));
        was[i] = audit.rejected(i);
      }
      EXPECT_LE(audit.remaining(), last_remaining);
      last_remaining = audit.remaining();
    }
    if (audit.decision() == Decision::Certified) {
      EXPECT_EQ(audit.remaining(), 0u);
      EXPECT_THROW(audit.observe(Ballot{}), std::logic_error);
      EXPECT_EQ(audit.decision(), Decision::Certified);
    }
  }
}

// Run to the end, the audit either certifies the true winner or reports the
// brute-force elimination order.
TEST(Observe, ExhaustionMatchesTabulation) {
  std::mt19937_64 rng(53);
  int wrong_runs = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 3 + trial % 2;
    const auto ballots = oracle::random_ballots(rng, n, 20 + static_cast<int>(rng() % 150));
    const auto truth = oracle::irv(oracle::rankings(ballots), n);
    if (truth.had_tie) continue;
    for (CandidateId w = 0; w < n; ++w) {
      auto audit = Audit::for_contest(n, w, ballots.size(), AuditConfig{});
      for (const auto& b : ballots) {
        if (audit.observe(b) != Decision::Ongoing) break;
      }
      ASSERT_NE(audit.decision(), Decision::Ongoing);
      if (w != truth.order.back()) {
        ++wrong_runs;
        EXPECT_EQ(audit.decision(), Decision::FullCountNeeded);
      }
      if (audit.decision() == Decision::FullCountNeeded) {
        EXPECT_EQ(audit.draws(), ballots.size());
        ASSERT_TRUE(audit.true_order());
        EXPECT_EQ(std::vector<int>(audit.true_order()->order.begin(),
                                   audit.true_order()->order.end()),
                  truth.order);
      }
    }
  }
  EXPECT_GT(wrong_runs, 50);
}

TEST(TuneFromCvrs, EasiestRequirementPerOrder) {
  const auto contest = awaire::generate_pathological(25);
  const auto alt = awaire::enumerate_alt_orders(6, 0);
  const auto pool = awaire::build_pool(alt);
  const auto plan = awaire::tune_from_cvrs(contest.ballots(), pool, alt, AuditConfig{});
  const auto rankings = oracle::rankings(contest.ballots());
  const double total = static_cast<double>(contest.num_ballots());

  std::size_t ending_in_b = 0;
  for (std::size_t i = 0; i < alt.size(); ++i) {
    const auto& refs = pool.per_order[i];
    std::vector<double> means;
    for (const auto r : refs) {
      const auto& req = pool.requirements[r];
      const auto votes = oracle::count(rankings, oracle::members(req.standing, 6), 6);
      const double others = total - votes[req.higher] - votes[req.lower];
      means.push_back((votes[req.lower] + 0.5 * others) / total);
      EXPECT_NEAR(plan.reported_means[r], means.back(), 1e-12);
    }
    const double best = *std::max_element(means.begin(), means.end());
    for (std::size_t k = 0; k < refs.size(); ++k) {
      EXPECT_EQ(plan.starting_weights[i][k], std::abs(means[k] - best) < 1e-12 ? 1.0 : 0.0);
    }
    if (alt.orders[i].winner() == 1) ++ending_in_b;
  }
  EXPECT_EQ(ending_in_b, 120u);
  for (std::size_t r = 0; r < pool.size(); ++r) {
    EXPECT_EQ(plan.eta0[r], plan.reported_means[r] > 0.5 ? plan.reported_means[r] : 0.52);
  }
}

TEST(TuneFromCvrs, LowReportedMeanUsesDefaultEta) {
  // 43 ballots for A, 14 for B, 43 blank: DB(A,B) has mean 0.355, DB(B,A)
  // has mean 0.645.
  std::vector<Ballot> cvrs;
  cvrs.insert(cvrs.end(), 43, Ballot{{0}});
  cvrs.insert(cvrs.end(), 14, Ballot{{1}});
  cvrs.insert(cvrs.end(), 43, Ballot{});
  const auto alt = awaire::enumerate_alt_orders(2, 1);
  const auto pool = awaire::build_pool(alt);
  const auto plan = awaire::tune_from_cvrs(cvrs, pool, alt, AuditConfig{});
  ASSERT_EQ(pool.size(), 1u);
  EXPECT_NEAR(plan.reported_means[0], 0.355, 1e-12);
  EXPECT_EQ(plan.eta0[0], 0.52);
  const auto other = awaire::enumerate_alt_orders(2, 0);
  const auto other_plan =
      awaire::tune_from_cvrs(cvrs, awaire::build_pool(other), other, AuditConfig{});
  EXPECT_NEAR(other_plan.eta0[0], 0.645, 1e-12);
}

TEST(TuneFromCvrs, TiedMaximaShareWeight) {
  // Blank CVRs give every requirement mean 1/2.
  const std::vector<Ballot> cvrs(10, Ballot{});
  const auto alt = awaire::enumerate_alt_orders(3, 0);
  const auto plan =
      awaire::tune_from_cvrs(cvrs, awaire::build_pool(alt), alt, AuditConfig{});
  for (const auto& w : plan.starting_weights) EXPECT_THAT(w, ElementsAre(1, 1, 1));
}

TEST(TuneFromCvrs, RosterMismatch) {
  const auto alt = awaire::enumerate_alt_orders(3, 0);
  const auto pool = awaire::build_pool(alt);
  EXPECT_THROW(awaire::tune_from_cvrs(std::vector<Ballot>{Ballot{{5}}}, pool, alt, AuditConfig{}),
               std::invalid_argument);
  EXPECT_THROW(awaire::tune_from_cvrs(std::vector<Ballot>{}, pool, alt, AuditConfig{}),
               std::invalid_argument);
}

TEST(Names, RoundTrip) {
  for (auto s : {WeightScheme::Linear, WeightScheme::Quadratic, WeightScheme::Largest,
                 WeightScheme::Fixed}) {
    EXPECT_EQ(awaire::parse_weight_scheme(awaire::to_string(s)), s);
  }
  EXPECT_EQ(awaire::parse_weight_scheme("LARGEST"), WeightScheme::Largest);
  EXPECT_THROW(awaire::parse_weight_scheme("softmax"), std::invalid_argument);
  for (auto d : {Decision::Ongoing, Decision::Certified, Decision::FullCountNeeded}) {
    EXPECT_EQ(awaire::parse_decision(awaire::to_string(d)), d);
  }
  EXPECT_EQ(awaire::to_string(Decision::FullCountNeeded), "full_count_needed");
}

}  // namespace
