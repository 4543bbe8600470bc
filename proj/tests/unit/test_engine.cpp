#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "sds/engine.hpp"

namespace {

using sds::ArrivalModel;
using sds::EvalConfig;
using sds::WaitingModel;

EvalConfig fixed(int n, std::uint64_t trials, std::uint64_t seed = 0) {
  EvalConfig c;
  c.trials = trials;
  c.seed = seed;
  c.population = sds::FixedPopulation{n};
  return c;
}

TEST(Evaluate, NeverAcceptIsExactlyZero) {
  const auto r = sds::evaluate(sds::NeverAccept{}, ArrivalModel::uniform(),
                               WaitingModel::exponential(1.0), fixed(50, 1000));
  EXPECT_EQ(r.successes, 0u);
  EXPECT_EQ(r.success_rate, 0.0);
}

TEST(Evaluate, SingleCandidateAlwaysWins) {
  const auto r = sds::evaluate(sds::Threshold{0.0}, ArrivalModel::uniform(),
                               WaitingModel::point(0.0), fixed(1, 100));
  EXPECT_EQ(r.success_rate, 1.0);
}

TEST(Evaluate, ClassicalRankCutoffMatchesRecursion) {
  const double exact = oracle::classical_skip(100, 37);
  EXPECT_NEAR(exact, 0.3710, 5e-5);
  for (auto route : {sds::EvalRoute::records, sds::EvalRoute::full}) {
    auto cfg = fixed(100, 100000, 3);
    cfg.route = route;
    const auto r = sds::evaluate(sds::RankCutoff{37}, ArrivalModel::uniform(),
                                 WaitingModel::point(0.0), cfg);
    EXPECT_NEAR(r.success_rate, exact, r.half_width);
  }
}

TEST(Evaluate, ClassicalThresholdMatchesBinomialMixture) {
  for (double theta : {0.0, 0.2679, 0.5, 0.8}) {
    const auto r = sds::evaluate(sds::Threshold{theta}, ArrivalModel::uniform(),
                                 WaitingModel::point(0.0), fixed(3, 200000, 1));
    EXPECT_NEAR(r.success_rate, oracle::classical_threshold(3, theta), r.half_width) << theta;
  }
}

TEST(Evaluate, RoutesAgreeWithWaiting) {
  const auto arrival = ArrivalModel::piecewise({{0.0, 0.5, 0.3}, {0.5, 1.0, 0.7}});
  const auto waiting = WaitingModel::exponential(3.0);
  auto a = fixed(30, 100000, 5);
  auto b = a;
  b.route = sds::EvalRoute::full;
  const auto ra = sds::evaluate(sds::Threshold{0.45}, arrival, waiting, a);
  const auto rb = sds::evaluate(sds::Threshold{0.45}, arrival, waiting, b);
  EXPECT_NEAR(ra.success_rate, rb.success_rate, ra.half_width + rb.half_width);
}

TEST(Evaluate, ResultIndependentOfThreads) {
  auto one = fixed(20, 30000, 9);
  one.threads = 1;
  auto many = one;
  many.threads = 4;
  const auto w = WaitingModel::exponential(1.0);
  EXPECT_EQ(sds::evaluate(sds::Threshold{0.4}, ArrivalModel::uniform(), w, one).successes,
            sds::evaluate(sds::Threshold{0.4}, ArrivalModel::uniform(), w, many).successes);
}

TEST(Evaluate, PoissonNeedsUniformArrivals) {
  EvalConfig cfg;
  cfg.population = sds::PoissonArrivals{10.0};
  EXPECT_THROW(sds::evaluate(sds::Threshold{0.3},
                             ArrivalModel::piecewise({{0.0, 0.5, 0.5}, {0.5, 1.0, 0.5}}),
                             WaitingModel::point(0.0), cfg),
               sds::ConfigError);
  cfg.trials = 20000;
  const auto r = sds::evaluate(sds::Threshold{std::exp(-1.0)}, ArrivalModel::uniform(),
                               WaitingModel::point(0.0), cfg);
  EXPECT_GT(r.success_rate, 0.3);
}

TEST(Conditional, AcceptAllContinuationMatchesEnumeration) {
  const auto u = ArrivalModel::uniform();
  // Candidate 3 lands within c of candidate 2 with probability one half.
  const double c = 0.8 * (1.0 - 1.0 / std::sqrt(2.0));
  ASSERT_NEAR(oracle::uniform_gap_cdf(c, 0.8), 0.5, 1e-12);
  struct Case {
    WaitingModel waiting;
    double expected;
  };
  const Case cases[] = {{WaitingModel::point(c), 7.0 / 12.0},
                        {WaitingModel::point(0.0), 0.5},
                        {WaitingModel::point(5.0), 2.0 / 3.0},
                        {WaitingModel::point(0.1), oracle::n3_accept_all(oracle::uniform_gap_cdf(0.1, 0.8))}};
  for (const auto& cs : cases)
    for (auto route : {sds::ConditionalRoute::sequential, sds::ConditionalRoute::triples,
                       sds::ConditionalRoute::records}) {
      const sds::ConditionalFutureSpec spec{0.2, 1, 3, u, cs.waiting};
      const auto r = sds::evaluate_conditional(sds::Threshold{0.0}, spec, fixed(3, 200000, 4), route);
      const double sigma = std::sqrt(cs.expected * (1 - cs.expected) / r.trials);
      EXPECT_NEAR(r.success_rate, cs.expected, 3.0 * sigma);
    }
}

TEST(Conditional, FullHistoryReturnsZero) {
  const sds::ConditionalFutureSpec spec{0.5, 4, 4, ArrivalModel::uniform(), WaitingModel::point(0)};
  EXPECT_EQ(sds::evaluate_conditional(sds::Threshold{0.0}, spec, fixed(4, 100)).success_rate, 0.0);
}

TEST(Concentration, ViolationFractionBelowBand) {
  EvalConfig cfg;
  cfg.trials = 5000;
  for (int n : {100, 400}) {
    const auto r = sds::concentration_check(n, ArrivalModel::uniform(), cfg);
    const double p = 1.0 / n;
    EXPECT_LE(r.fraction, p + 3.0 * std::sqrt(p * (1 - p) / cfg.trials));
    EXPECT_DOUBLE_EQ(r.gamma, 2.0 * std::sqrt(n * std::log(2.0 * n)));
  }
}

}  // namespace
