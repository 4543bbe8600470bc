#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "sds/checks.hpp"
#include "sds/process.hpp"

namespace {

using sds::ArrivalModel;
using sds::ConfigError;
using sds::WaitingModel;

TEST(Trajectory, DeparturesAreTruncatedAtOne) {
  const auto t = sds::make_trajectory({0.1, 0.5, 0.9}, {0.2, 0.0, 0.5}, {1, 2, 1});
  EXPECT_DOUBLE_EQ(t.departures[0], 0.1 + 0.2);
  EXPECT_DOUBLE_EQ(t.departures[1], 0.5);
  EXPECT_DOUBLE_EQ(t.departures[2], 1.0);
  EXPECT_EQ(t.global_best(), 3);
  EXPECT_TRUE(t.best_so_far(1));
  EXPECT_FALSE(t.best_so_far(2));
}

TEST(Trajectory, Validation) {
  EXPECT_THROW(sds::make_trajectory({0.5, 0.1}, {0, 0}, {1, 1}), ConfigError);
  EXPECT_THROW(sds::make_trajectory({0.1, 0.5}, {0, -1}, {1, 1}), ConfigError);
  EXPECT_THROW(sds::make_trajectory({0.1, 0.5}, {0, 0}, {1, 3}), ConfigError);
  EXPECT_THROW(sds::make_trajectory({0.1}, {0, 0}, {1}), ConfigError);
}

TEST(Events, SupersededCandidatesProduceNoEvent) {
  // Candidate 1 is still waiting when candidate 2 (a new best) arrives.
  const auto t = sds::make_trajectory({0.1, 0.2, 0.5}, {0.15, 0.1, 0.1}, {1, 1, 2});
  const auto ev = sds::decision_events(t);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].candidate, 2);
  EXPECT_DOUBLE_EQ(ev[0].time, 0.3);
  EXPECT_EQ(ev[0].k_at_t, 2);
  EXPECT_TRUE(ev[0].global_best);
}

TEST(Events, ZeroWaitsGiveOneEventPerRecord) {
  const auto t = sds::make_trajectory({0.1, 0.2, 0.3, 0.4}, {0, 0, 0, 0}, {1, 2, 1, 3});
  const auto ev = sds::decision_events(t);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].candidate, 1);
  EXPECT_EQ(ev[0].k_at_t, 1);
  EXPECT_FALSE(ev[0].global_best);
  EXPECT_EQ(ev[1].candidate, 3);
  EXPECT_EQ(ev[1].k_at_t, 3);
  EXPECT_TRUE(ev[1].global_best);
}

TEST(Events, ArrivalAtTheDepartureInstantSupersedes) {
  const auto t = sds::make_trajectory({0.1, 0.3}, {0.2, 0.0}, {1, 1});
  const auto ev = sds::decision_events(t);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].candidate, 2);
}

TEST(History, ShowsOnlyPastInformation) {
  const auto t = sds::make_trajectory({0.1, 0.2, 0.6}, {0.05, 0.5, 0.1}, {1, 2, 1});
  const auto h = sds::history_at(t, 0.4);
  ASSERT_EQ(h.arrivals.size(), 2u);
  ASSERT_TRUE(h.departures[0].has_value());
  EXPECT_DOUBLE_EQ(*h.departures[0], 0.15);
  EXPECT_FALSE(h.departures[1].has_value());
}

TEST(Sampling, RelativeRanksAreUniform) {
  const int n = 6;
  std::vector<std::vector<double>> counts(n, std::vector<double>(n, 0.0));
  const int trials = 30000;
  for (int i = 0; i < trials; ++i) {
    auto gen = sds::make_stream(5, 5, i);
    const auto t = sds::sample_instance(n, ArrivalModel::uniform(), WaitingModel::point(0), gen);
    ASSERT_TRUE(std::is_sorted(t.arrivals.begin(), t.arrivals.end()));
    for (int j = 0; j < n; ++j) counts[j][t.rel_ranks[j] - 1] += 1.0;
  }
  for (int j = 1; j < n; ++j) {
    double stat = 0.0;
    const double e = static_cast<double>(trials) / (j + 1);
    for (int r = 0; r <= j; ++r) stat += (counts[j][r] - e) * (counts[j][r] - e) / e;
    boost::math::chi_squared_distribution<double> dist(j);
    EXPECT_GT(boost::math::cdf(boost::math::complement(dist, stat)), 1e-3) << "position " << j;
  }
}

TEST(ConditionalFuture, SpecValidation) {
  const auto u = ArrivalModel::uniform();
  const auto w = WaitingModel::point(0);
  EXPECT_THROW((sds::ConditionalFutureSpec{0.5, 4, 3, u, w}.validate()), ConfigError);
  EXPECT_THROW((sds::ConditionalFutureSpec{0.0, 1, 3, u, w}.validate()), ConfigError);
  EXPECT_THROW((sds::ConditionalFutureSpec{1.0, 1, 3, u, w}.validate()), ConfigError);
  auto gen = sds::make_stream(0, 0, 0);
  const auto f =
      sds::sample_conditional_future({0.5, 3, 3, u, w}, gen, sds::FutureMode::sequential);
  EXPECT_TRUE(f.arrivals.empty());
  EXPECT_TRUE(sds::decision_events(f).empty());
}

TEST(ConditionalFuture, ArrivalsAfterTAndSorted) {
  const sds::ConditionalFutureSpec spec{0.7, 2, 10, ArrivalModel::uniform(),
                                        WaitingModel::exponential(1.0)};
  for (auto mode : {sds::FutureMode::sequential, sds::FutureMode::triples}) {
    auto gen = sds::make_stream(1, 2, 3);
    const auto f = sds::sample_conditional_future(spec, gen, mode);
    ASSERT_EQ(f.arrivals.size(), 8u);
    EXPECT_TRUE(std::is_sorted(f.arrivals.begin(), f.arrivals.end()));
    for (std::size_t p = 0; p < f.arrivals.size(); ++p) {
      EXPECT_GT(f.arrivals[p], 0.7);
      EXPECT_LE(f.departures[p], 1.0);
    }
  }
}

TEST(ConditionalFuture, LibraryPatternLawMatchesEnumeration) {
  for (int n = 2; n <= 7; ++n)
    for (int k = std::max(0, n - 4); k < n; ++k) {
      const auto exact = oracle::enumerate_pattern_law(n, k);
      const auto lib = sds::best_pattern_law(n, k);
      ASSERT_EQ(exact.size(), lib.size());
      for (std::size_t i = 0; i < exact.size(); ++i) EXPECT_NEAR(lib[i], exact[i], 1e-12);
    }
}

TEST(ConditionalFuture, BothSamplersMatchEnumeratedPatternLaw) {
  for (int gap = 1; gap <= 4; ++gap)
    for (auto mode : {sds::FutureMode::sequential, sds::FutureMode::triples}) {
      const int n = 6, k = n - gap;
      const sds::ConditionalFutureSpec spec{0.3, k, n, ArrivalModel::uniform(),
                                            WaitingModel::exponential(1.0)};
      const auto law = oracle::enumerate_pattern_law(n, k);
      std::vector<std::uint64_t> counts(law.size(), 0);
      for (std::uint64_t i = 0; i < 40000; ++i) {
        auto gen = sds::make_stream(17, gap, i);
        ++counts[sds::best_pattern(sds::sample_conditional_future(spec, gen, mode))];
      }
      EXPECT_GT(sds::chi_square_gof(counts, law).p_value, 1e-3) << "gap " << gap;
    }
}

/// Two-sample KS statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

struct EventSummary {
  std::vector<double> first_time;
  std::vector<double> first_k;
  std::vector<double> count;
  std::vector<double> last_time;
};

void add(EventSummary& s, const std::vector<sds::DecisionEvent>& ev) {
  s.count.push_back(static_cast<double>(ev.size()));
  if (!ev.empty()) {
    s.first_time.push_back(ev.front().time);
    s.first_k.push_back(ev.front().k_at_t);
    s.last_time.push_back(ev.back().time);
  }
}

void expect_same_law(const EventSummary& a, const EventSummary& b) {
  const auto crit = [](std::size_t n, std::size_t m) {
    return 1.949 * std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
  };
  // 0.1% level two-sample KS for each summary statistic.
  EXPECT_LT(ks_two_sample(a.first_time, b.first_time), crit(a.first_time.size(), b.first_time.size()));
  EXPECT_LT(ks_two_sample(a.last_time, b.last_time), crit(a.last_time.size(), b.last_time.size()));
  // Discrete statistics: compare means within 4 standard errors.
  for (auto field : {&EventSummary::first_k, &EventSummary::count}) {
    auto mean_var = [](const std::vector<double>& v) {
      double m = 0, s = 0;
      for (double x : v) m += x;
      m /= v.size();
      for (double x : v) s += (x - m) * (x - m);
      return std::pair{m, s / (v.size() - 1)};
    };
    const auto [ma, va] = mean_var(a.*field);
    const auto [mb, vb] = mean_var(b.*field);
    EXPECT_NEAR(ma, mb, 4.0 * std::sqrt(va / (a.*field).size() + vb / (b.*field).size()));
  }
}

TEST(RecordChain, MatchesFullTrajectoriesUnconditionally) {
  const auto arrival = ArrivalModel::piecewise({{0.0, 0.3, 0.5}, {0.3, 1.0, 0.5}});
  const auto waiting = WaitingModel::exponential(4.0);
  const int n = 40;
  EventSummary full, sparse;
  for (std::uint64_t i = 0; i < 40000; ++i) {
    auto g1 = sds::make_stream(1, 1, i);
    add(full, sds::decision_events(sds::sample_instance(n, arrival, waiting, g1)));
    auto g2 = sds::make_stream(2, 2, i);
    sds::RecordChain chain(arrival, waiting, n);
    std::vector<sds::DecisionEvent> ev;
    while (auto e = chain.next(g2)) ev.push_back(*e);
    add(sparse, ev);
  }
  expect_same_law(full, sparse);
}

TEST(RecordChain, MatchesConditionalSampler) {
  const auto arrival = ArrivalModel::uniform();
  const auto waiting = WaitingModel::point(0.05);
  const sds::ConditionalFutureSpec spec{0.35, 6, 25, arrival, waiting};
  EventSummary full, sparse;
  for (std::uint64_t i = 0; i < 40000; ++i) {
    auto g1 = sds::make_stream(3, 3, i);
    add(full, sds::decision_events(
                  sds::sample_conditional_future(spec, g1, sds::FutureMode::triples)));
    auto g2 = sds::make_stream(4, 4, i);
    sds::RecordChain chain(arrival, waiting, spec.n, spec.k, spec.t);
    std::vector<sds::DecisionEvent> ev;
    while (auto e = chain.next(g2)) ev.push_back(*e);
    add(sparse, ev);
  }
  expect_same_law(full, sparse);
}

TEST(RecordChain, EventsAreTimeOrderedAndEndWithGlobalBest) {
  const auto arrival = ArrivalModel::uniform();
  const auto waiting = WaitingModel::exponential(3.0);
  for (std::uint64_t i = 0; i < 2000; ++i) {
    auto gen = sds::make_stream(6, 6, i);
    sds::RecordChain chain(arrival, waiting, 100);
    double last = -1.0;
    int last_k = 0;
    bool saw_best = false;
    while (auto e = chain.next(gen)) {
      ASSERT_FALSE(saw_best);
      ASSERT_GE(e->time, last);
      ASSERT_GE(e->k_at_t, last_k);
      ASSERT_GE(e->k_at_t, e->candidate);
      ASSERT_LE(e->k_at_t, 100);
      last = e->time;
      last_k = e->k_at_t;
      saw_best = e->global_best;
    }
  }
}

}  // namespace
