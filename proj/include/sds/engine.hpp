#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <variant>

#include "sds/distributions.hpp"
#include "sds/errors.hpp"
#include "sds/parallel.hpp"
#include "sds/policies.hpp"
#include "sds/process.hpp"
#include "sds/random.hpp"

namespace sds {

struct FixedPopulation {
  int n = 1;
};

using Population = std::variant<FixedPopulation, PoissonArrivals>;

/// How trials are generated. `records` samples only best-so-far candidates
/// (fast); `full` materializes every candidate. Both have the same law.
enum class EvalRoute { records, full };

struct EvalConfig {
  std::uint64_t trials = 100000;
  std::uint64_t seed = 0;
  Population population = FixedPopulation{1};
  unsigned threads = 0;
  EvalRoute route = EvalRoute::records;
};

/// 99% two-sided normal quantile.
inline constexpr double kZ99 = 2.576;

struct EvalReport {
  double success_rate = 0.0;
  double half_width = 0.0;
  std::uint64_t successes = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

inline EvalReport make_report(std::uint64_t successes, std::uint64_t trials, std::uint64_t seed) {
  EvalReport r;
  r.successes = successes;
  r.trials = trials;
  r.seed = seed;
  r.success_rate = static_cast<double>(successes) / static_cast<double>(trials);
  r.half_width = kZ99 * std::sqrt(r.success_rate * (1.0 - r.success_rate) / trials);
  return r;
}

namespace detail {

inline void check_eval_config(const EvalConfig& cfg, const ArrivalModel& arrival) {
  if (cfg.trials < 1) throw ConfigError("trials", "must be >= 1");
  if (const auto* fixed = std::get_if<FixedPopulation>(&cfg.population); fixed && fixed->n < 1)
    throw ConfigError("n", "candidate count must be >= 1");
  if (const auto* p = std::get_if<PoissonArrivals>(&cfg.population)) {
    if (!(p->rate > 0.0)) throw ConfigError("arrivals.rate", "Poisson rate must be > 0");
    if (!arrival.is_uniform())
      throw ConfigError("arrival", "Poisson population requires the uniform arrival model");
  }
}

template <class Gen>
int draw_population(const Population& pop, Gen& gen) {
  if (const auto* fixed = std::get_if<FixedPopulation>(&pop)) return fixed->n;
  return sample_count(std::get<PoissonArrivals>(pop), gen);
}

}  // namespace detail

/// The full trajectory that evaluate(route = full) uses for trial `index`;
/// nullopt when a Poisson population comes out empty.
inline std::optional<Trajectory> trial_instance(const ArrivalModel& arrival,
                                                const WaitingModel& waiting,
                                                const EvalConfig& cfg, std::uint64_t index) {
  auto gen = make_stream(cfg.seed, streams::kEvaluate, index);
  const int n = detail::draw_population(cfg.population, gen);
  if (n == 0) return std::nullopt;
  return sample_instance(n, arrival, waiting, gen);
}

/// Monte Carlo success probability of `policy`. Trial i uses stream
/// (seed, i), so the result does not depend on the thread count.
inline EvalReport evaluate(const Policy& policy, const ArrivalModel& arrival,
                           const WaitingModel& waiting, const EvalConfig& cfg,
                           const RunOptions& opts = {}) {
  detail::check_eval_config(cfg, arrival);
  validate_policy(policy);
  if (std::holds_alternative<NeverAccept>(policy)) return make_report(0, cfg.trials, cfg.seed);

  const auto hits = parallel_count(cfg.trials, cfg.threads, [&](std::uint64_t i) {
    if (cfg.route == EvalRoute::full) {
      const auto traj = trial_instance(arrival, waiting, cfg, i);
      return traj && run_policy(policy, *traj, opts).success;
    }
    auto gen = make_stream(cfg.seed, streams::kEvaluate, i);
    const int n = detail::draw_population(cfg.population, gen);
    if (n == 0) return false;
    RecordChain chain(arrival, waiting, n);
    return walk_events(policy, [&] { return chain.next(gen); }, opts).success;
  });
  return make_report(hits, cfg.trials, cfg.seed);
}

/// Which sampler evaluate_conditional draws futures from.
enum class ConditionalRoute { sequential, triples, records };

/// Estimates Pr[success | best-so-far departs at spec.t, K_t = spec.k] when
/// that candidate is rejected and `continuation` runs on the future. A trial
/// succeeds iff the accepted future candidate is the last best-flagged one;
/// with no future best-flag the departed candidate was the global best and the
/// trial fails.
inline EvalReport evaluate_conditional(const Policy& continuation,
                                       const ConditionalFutureSpec& spec, const EvalConfig& cfg,
                                       ConditionalRoute route = ConditionalRoute::sequential) {
  spec.validate();
  validate_policy(continuation);
  if (cfg.trials < 1) throw ConfigError("trials", "must be >= 1");
  if (spec.k == spec.n) return make_report(0, cfg.trials, cfg.seed);

  const auto hits = parallel_count(cfg.trials, cfg.threads, [&](std::uint64_t i) {
    auto gen = make_stream(cfg.seed, streams::kConditional, i);
    if (route == ConditionalRoute::records) {
      RecordChain chain(spec.arrival, spec.waiting, spec.n, spec.k, spec.t);
      return walk_events(continuation, [&] { return chain.next(gen); }).success;
    }
    const auto mode =
        route == ConditionalRoute::triples ? FutureMode::triples : FutureMode::sequential;
    const auto future = sample_conditional_future(spec, gen, mode);
    return run_events(continuation, decision_events(future)).success;
  });
  return make_report(hits, cfg.trials, cfg.seed);
}

struct ConcentrationReport {
  std::uint64_t violations = 0;
  std::uint64_t trials = 0;
  double fraction = 0.0;
  double gamma = 0.0;
};

/// Half-width 2 sqrt(n ln 2n) of the band that K_t stays within w.p. 1 - 1/n.
inline double concentration_band(int n) { return 2.0 * std::sqrt(n * std::log(2.0 * n)); }

/// Fraction of trials where |K_t - n A(t)| > gamma for some t. K_t is a step
/// function, so the supremum is attained at an arrival epoch or just before it.
inline ConcentrationReport concentration_check(int n, const ArrivalModel& arrival,
                                               const EvalConfig& cfg) {
  if (n < 2) throw ConfigError("n", "concentration check needs n >= 2");
  if (cfg.trials < 1) throw ConfigError("trials", "must be >= 1");
  const double gamma = concentration_band(n);
  const auto hits = parallel_count(cfg.trials, cfg.threads, [&](std::uint64_t i) {
    auto gen = make_stream(cfg.seed, streams::kConcentration, i);
    std::vector<double> a(n);
    for (auto& x : a) x = sample_arrival(arrival, gen);
    std::sort(a.begin(), a.end());
    for (int j = 0; j < n; ++j) {
      const double expected = n * arrival.cdf(a[j]);
      if ((j + 1) - expected > gamma || expected - j > gamma) return true;
    }
    return false;
  });
  ConcentrationReport r;
  r.violations = hits;
  r.trials = cfg.trials;
  r.fraction = static_cast<double>(hits) / cfg.trials;
  r.gamma = gamma;
  return r;
}

}  // namespace sds
