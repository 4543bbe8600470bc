#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "sds/distributions.hpp"
#include "sds/engine.hpp"
#include "sds/errors.hpp"
#include "sds/isotonic.hpp"
#include "sds/parallel.hpp"
#include "sds/policies.hpp"
#include "sds/process.hpp"
#include "sds/random.hpp"

namespace sds {

struct SolverConfig {
  int n = 50;
  int cells = 64;
  std::uint64_t rollouts = 5000;
  std::uint64_t seed = 0;
  /// Pool-adjacent-violators on the cutoffs along t. Only applied for the
  /// uniform arrival model, where the optimal cutoffs are nondecreasing in t.
  bool isotonic = true;
  /// Probe every k instead of binary search (validation aid).
  bool linear_scan = false;
  unsigned threads = 0;

  void validate() const {
    if (n < 2) throw ConfigError("n", "solver needs n >= 2");
    if (cells < 2) throw ConfigError("grid", "needs at least 2 cells");
    if (rollouts < 100) throw ConfigError("rollouts", "needs at least 100 rollouts");
  }
};

/// Called once per rejection-value estimate with the cell being solved and
/// the earliest cell whose rule any rollout consulted (cells() for the
/// terminal accept-all rule).
struct SolverHooks {
  std::function<void(int cell, int earliest_read)> on_estimate;
};

struct CellProbe {
  int k = 0;
  double rejection_value = 0.0;  // estimate of Pr[success(reject) | t, K_t = k]
  double half_width = 0.0;
};

struct BivariateSolution {
  BivariateGrid policy;             // cutoffs after the optional projection
  std::vector<int> raw_cutoffs;     // straight from the sweep
  std::vector<double> probe_times;  // where each cell's estimates were taken
  std::vector<bool> uncertain;      // boundary not resolved at 99% confidence
  std::vector<std::vector<CellProbe>> probes;
  bool projected = false;
};

/// Cell boundaries at equal steps of A(t): t_j = A^{-1}(j/m), t_m = 1.
inline std::vector<double> quantile_grid(const ArrivalModel& arrival, int cells) {
  std::vector<double> times(cells + 1);
  for (int j = 0; j < cells; ++j) times[j] = arrival.quantile(static_cast<double>(j) / cells);
  times[cells] = 1.0;
  return times;
}

inline std::vector<int> project_cutoffs(const std::vector<int>& cutoffs) {
  std::vector<double> v(cutoffs.begin(), cutoffs.end());
  const auto fit = isotonic_nondecreasing(v);
  std::vector<int> out(fit.size());
  for (std::size_t j = 0; j < fit.size(); ++j) out[j] = static_cast<int>(std::lround(fit[j]));
  return out;
}

namespace detail {

/// Estimates the rejection value at (t, k) for cell `cell`, continuing with
/// the already-solved cells after it. Events inside the current cell use the
/// next cell's rule; past the last cell the rule is accept-all.
inline CellProbe estimate_cell(const ArrivalModel& arrival, const WaitingModel& waiting,
                               const SolverConfig& cfg, const BivariateGrid& grid, int cell,
                               double t, int k, const SolverHooks& hooks) {
  const int m = grid.cells();
  const int borrowed = cell + 1 < m ? grid.cutoffs[cell + 1] : 0;
  const std::uint64_t tag = stream_tag({streams::kSolverCell, static_cast<std::uint64_t>(cell),
                                        static_cast<std::uint64_t>(k)});
  std::atomic<int> earliest{std::numeric_limits<int>::max()};
  const bool track = static_cast<bool>(hooks.on_estimate);

  const auto hits = parallel_count(cfg.rollouts, cfg.threads, [&](std::uint64_t i) {
    auto gen = make_stream(cfg.seed, tag, i);
    RecordChain chain(arrival, waiting, cfg.n, k, t);
    int seen = std::numeric_limits<int>::max();
    bool success = false;
    while (auto ev = chain.next(gen)) {
      const int c = grid.cell_of(ev->time);
      const int read = c <= cell ? cell + 1 : c;
      seen = std::min(seen, read);
      const int cutoff = c <= cell ? borrowed : grid.cutoffs[c];
      if (ev->k_at_t > cutoff) {
        success = ev->global_best;
        break;
      }
    }
    if (track) {
      int cur = earliest.load();
      while (seen < cur && !earliest.compare_exchange_weak(cur, seen)) {
      }
    }
    return success;
  });
  if (track) hooks.on_estimate(cell, earliest.load());
  const auto report = make_report(hits, cfg.rollouts, cfg.seed);
  return {k, report.success_rate, report.half_width};
}

}  // namespace detail

/// Approximately optimal bivariate policy by a backward sweep over time
/// cells. For each cell the accept rule compares the accept value k/n with a
/// rollout estimate of the rejection value; the lazy rule rejects on ties, so
/// the cutoff is the largest k with k/n <= r(t, k).
inline BivariateSolution solve_bivariate(const ArrivalModel& arrival, const WaitingModel& waiting,
                                         const SolverConfig& cfg, const SolverHooks& hooks = {}) {
  cfg.validate();
  const int m = cfg.cells;
  const int n = cfg.n;
  BivariateSolution sol;
  sol.policy.times = quantile_grid(arrival, m);
  sol.policy.cutoffs.assign(m, 0);
  sol.probe_times.resize(m);
  sol.uncertain.assign(m, false);
  sol.probes.resize(m);

  for (int j = m - 1; j >= 0; --j) {
    const double t = arrival.quantile((j + 0.5) / m);
    sol.probe_times[j] = t;
    auto& probes = sol.probes[j];
    auto rejects = [&](int k) {
      const auto p = detail::estimate_cell(arrival, waiting, cfg, sol.policy, j, t, k, hooks);
      probes.push_back(p);
      return static_cast<double>(k) / n <= p.rejection_value;
    };

    int cutoff = 0;
    if (cfg.linear_scan) {
      for (int k = 1; k < n; ++k)
        if (rejects(k)) cutoff = k;
    } else {
      // Smallest accepting k in [1, n]; k = n always accepts (no future).
      int lo = 1, hi = n;
      while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        if (rejects(mid))
          lo = mid + 1;
        else
          hi = mid;
      }
      cutoff = lo - 1;
    }
    sol.policy.cutoffs[j] = cutoff;
    for (const auto& p : probes)
      if ((p.k == cutoff || p.k == cutoff + 1) &&
          std::abs(static_cast<double>(p.k) / n - p.rejection_value) <= p.half_width)
        sol.uncertain[j] = true;
  }

  sol.raw_cutoffs = sol.policy.cutoffs;
  if (cfg.isotonic && arrival.is_uniform()) {
    sol.policy.cutoffs = project_cutoffs(sol.raw_cutoffs);
    sol.projected = true;
  }
  return sol;
}

struct MonotonicityReport {
  int k_violations = 0;
  int t_violations_raw = 0;
  int t_violations_projected = 0;
  int max_drop = 0;  // largest cutoff decrease between adjacent cells
  bool projection_applies = false;
};

/// Counts adjacent cells whose cutoff decreases in t (the accept region
/// grows with time), before and after isotonic projection.
inline MonotonicityReport monotonicity_report(const BivariateGrid& grid,
                                              const ArrivalModel& arrival) {
  grid.validate();
  MonotonicityReport r;
  r.projection_applies = arrival.is_uniform();
  const Policy policy = grid;
  const int k_max = *std::max_element(grid.cutoffs.begin(), grid.cutoffs.end()) + 2;
  for (int j = 0; j < grid.cells(); ++j) {
    const double t = grid.times[j + 1];
    for (int k = 1; k < k_max; ++k)
      if (decide(policy, t, k) && !decide(policy, t, k + 1)) ++r.k_violations;
  }
  auto count_drops = [](const std::vector<int>& c, int* max_drop) {
    int v = 0;
    for (std::size_t j = 1; j < c.size(); ++j)
      if (c[j] < c[j - 1]) {
        ++v;
        if (max_drop) *max_drop = std::max(*max_drop, c[j - 1] - c[j]);
      }
    return v;
  };
  r.t_violations_raw = count_drops(grid.cutoffs, &r.max_drop);
  r.t_violations_projected = count_drops(project_cutoffs(grid.cutoffs), nullptr);
  return r;
}

// ---------------------------------------------------------------------------
// Success curve and single threshold
// ---------------------------------------------------------------------------

/// Estimates of the best success probability when every candidate arriving
/// at or before t is barred.
struct PnCurve {
  std::vector<double> times;
  std::vector<double> estimates;
  std::vector<double> half_widths;
  bool projected = false;
};

struct ThresholdResult {
  double t_star = 0.0;
  double p_at_t_star = 0.0;
  int n = 0;
  PnCurve curve;
  BivariateSolution solution;
};

/// Runs the solved grid on full instances, never accepting candidates that
/// arrived by t. All t share one stream family, so the curve uses common
/// random numbers.
inline EvalReport estimate_pn(const BivariateGrid& grid, const ArrivalModel& arrival,
                              const WaitingModel& waiting, double t, const SolverConfig& cfg) {
  cfg.validate();
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("t", "must lie in [0,1]");
  if (arrival.cdf(t) >= 1.0) return make_report(0, cfg.rollouts, cfg.seed);
  EvalConfig ec;
  ec.trials = cfg.rollouts;
  ec.seed = stream_tag({streams::kPn, cfg.seed});
  ec.population = FixedPopulation{cfg.n};
  ec.threads = cfg.threads;
  RunOptions opts;
  opts.bar_arrivals_through = t;
  auto report = evaluate(grid, arrival, waiting, ec, opts);
  report.seed = cfg.seed;
  return report;
}

/// Solves the bivariate policy first, then estimates at t.
inline EvalReport estimate_pn(const ArrivalModel& arrival, const WaitingModel& waiting, double t,
                              const SolverConfig& cfg) {
  const auto sol = solve_bivariate(arrival, waiting, cfg);
  return estimate_pn(sol.policy, arrival, waiting, t, cfg);
}

/// Crossing of the (projected) curve with A(t): bisection over grid indices
/// for the sign change of P(t) - A(t), then linear interpolation in the cell.
inline std::pair<double, double> locate_crossing(const PnCurve& curve,
                                                 const ArrivalModel& arrival) {
  const auto& ts = curve.times;
  const auto& ps = curve.estimates;
  if (ts.size() < 2 || ts.size() != ps.size())
    throw ConfigError("curve", "needs at least two matching points");
  auto diff = [&](std::size_t i) { return ps[i] - arrival.cdf(ts[i]); };
  std::size_t lo = 0, hi = ts.size() - 1;
  if (!(diff(lo) > 0.0) || !(diff(hi) < 0.0))
    throw NoCrossingError("success curve does not cross the arrival CDF on the grid");
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (diff(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double dlo = diff(lo), dhi = diff(hi);
  const double w = dlo / (dlo - dhi);
  return {ts[lo] + w * (ts[hi] - ts[lo]), ps[lo] + w * (ps[hi] - ps[lo])};
}

inline ThresholdResult find_threshold(const ArrivalModel& arrival, const WaitingModel& waiting,
                                      const SolverConfig& cfg) {
  if (!arrival.is_continuous())
    throw ConfigError("arrival", "threshold finder requires a continuous arrival model");
  ThresholdResult res;
  res.n = cfg.n;
  res.solution = solve_bivariate(arrival, waiting, cfg);
  auto& curve = res.curve;
  curve.times = res.solution.policy.times;
  for (double t : curve.times) {
    const auto r = estimate_pn(res.solution.policy, arrival, waiting, t, cfg);
    curve.estimates.push_back(r.success_rate);
    curve.half_widths.push_back(r.half_width);
  }
  curve.estimates = isotonic_nonincreasing(curve.estimates);
  curve.projected = true;
  std::tie(res.t_star, res.p_at_t_star) = locate_crossing(curve, arrival);
  return res;
}

}  // namespace sds
