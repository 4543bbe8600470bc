#include <gtest/gtest.h>

#include "sds/policies.hpp"

namespace {

using sds::BivariateGrid;
using sds::ConfigError;
using sds::Policy;

TEST(Decide, ThresholdRejectsOnTies) {
  const Policy p = sds::Threshold{0.4};
  EXPECT_FALSE(sds::decide(p, 0.4, 10));
  EXPECT_TRUE(sds::decide(p, 0.4000001, 1));
  EXPECT_FALSE(sds::decide(p, 0.1, 100));
}

TEST(Decide, NeverAndRankCutoff) {
  EXPECT_FALSE(sds::decide(Policy{sds::NeverAccept{}}, 1.0, 5));
  const Policy r = sds::RankCutoff{2};
  EXPECT_FALSE(sds::decide(r, sds::DecisionPoint{0.9, 5, 2}));
  EXPECT_TRUE(sds::decide(r, sds::DecisionPoint{0.1, 3, 3}));
}

TEST(Grid, CellsAreRightClosed) {
  const BivariateGrid g{{0.0, 0.25, 0.5, 1.0}, {5, 3, 1}};
  EXPECT_EQ(g.cell_of(0.0), 0);
  EXPECT_EQ(g.cell_of(0.25), 0);
  EXPECT_EQ(g.cell_of(0.2500001), 1);
  EXPECT_EQ(g.cell_of(0.5), 1);
  EXPECT_EQ(g.cell_of(1.0), 2);
  const Policy p = g;
  EXPECT_FALSE(sds::decide(p, 0.1, 5));
  EXPECT_TRUE(sds::decide(p, 0.1, 6));
  EXPECT_TRUE(sds::decide(p, 0.75, 2));
  EXPECT_FALSE(sds::decide(p, 0.75, 1));
}

TEST(Grid, Validation) {
  EXPECT_THROW(sds::validate_policy(BivariateGrid{{0.0, 1.0}, {1, 2}}), ConfigError);
  EXPECT_THROW(sds::validate_policy(BivariateGrid{{0.0, 0.5, 0.5, 1.0}, {1, 1, 1}}), ConfigError);
  EXPECT_THROW(sds::validate_policy(BivariateGrid{{0.0, 0.5, 0.9}, {1, 1}}), ConfigError);
  EXPECT_THROW(sds::validate_policy(BivariateGrid{{0.0, 0.5, 1.0}, {1, -1}}), ConfigError);
  EXPECT_THROW(sds::validate_policy(sds::Threshold{1.5}), ConfigError);
  EXPECT_THROW(sds::validate_policy(sds::RankCutoff{-1}), ConfigError);
  EXPECT_NO_THROW(sds::validate_policy(BivariateGrid{{0.0, 0.5, 1.0}, {1, 0}}));
}

TEST(Run, FirstAcceptedEventDecides) {
  // Candidate 1 leaves at 0.3 as best-so-far; candidate 3 is the global best.
  const auto t = sds::make_trajectory({0.1, 0.4, 0.5}, {0.2, 0.0, 0.1}, {1, 2, 1});
  const auto early = sds::run_policy(sds::Threshold{0.2}, t);
  ASSERT_TRUE(early.accepted.has_value());
  EXPECT_EQ(*early.accepted, 1);
  EXPECT_FALSE(early.success);
  const auto late = sds::run_policy(sds::Threshold{0.35}, t);
  EXPECT_EQ(*late.accepted, 3);
  EXPECT_TRUE(late.success);
  EXPECT_DOUBLE_EQ(*late.accept_time, 0.6);
  EXPECT_FALSE(sds::run_policy(sds::NeverAccept{}, t).accepted.has_value());
}

TEST(Run, BarredArrivalsAreSkipped) {
  const auto t = sds::make_trajectory({0.1, 0.4, 0.5}, {0.2, 0.0, 0.1}, {1, 2, 1});
  sds::RunOptions opts;
  opts.bar_arrivals_through = 0.1;
  const auto r = sds::run_policy(sds::Threshold{0.0}, t, opts);
  EXPECT_EQ(*r.accepted, 3);
  opts.bar_arrivals_through = 0.5;
  EXPECT_FALSE(sds::run_policy(sds::Threshold{0.0}, t, opts).accepted.has_value());
}

TEST(Kind, Names) {
  EXPECT_EQ(sds::policy_kind(sds::NeverAccept{}), "never");
  EXPECT_EQ(sds::policy_kind(sds::Threshold{}), "threshold");
  EXPECT_EQ(sds::policy_kind(sds::RankCutoff{}), "rankcutoff");
  EXPECT_EQ(sds::policy_kind(BivariateGrid{}), "grid");
}

}  // namespace
