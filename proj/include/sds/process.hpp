#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "sds/distributions.hpp"
#include "sds/errors.hpp"
#include "sds/random.hpp"

namespace sds {

/// One realized instance. Candidates are indexed 1..n in arrival order; the
/// vectors are 0-based, so candidate i lives at position i-1.
struct Trajectory {
  std::vector<double> arrivals;    // sorted nondecreasing
  std::vector<double> waits;       // L_i >= 0
  std::vector<double> departures;  // min(A_i + L_i, 1)
  std::vector<int> rel_ranks;      // R_i in [1, i]

  int size() const { return static_cast<int>(arrivals.size()); }
  bool best_so_far(int candidate) const { return rel_ranks[candidate - 1] == 1; }

  /// Candidate holding global rank 1: the last one that was best at arrival.
  int global_best() const {
    for (int i = size(); i >= 1; --i)
      if (best_so_far(i)) return i;
    return 0;
  }
};

/// Builds a trajectory from raw vectors, checking the invariants.
inline Trajectory make_trajectory(std::vector<double> arrivals, std::vector<double> waits,
                                  std::vector<int> rel_ranks) {
  const std::size_t n = arrivals.size();
  if (waits.size() != n || rel_ranks.size() != n)
    throw ConfigError("trajectory", "arrival, wait and rank vectors differ in length");
  if (n == 0) throw ConfigError("trajectory", "empty trajectory");
  Trajectory t;
  t.departures.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(arrivals[i] >= 0.0 && arrivals[i] <= 1.0))
      throw ConfigError("trajectory.a[" + std::to_string(i) + "]", "arrival outside [0,1]");
    if (i > 0 && arrivals[i] < arrivals[i - 1])
      throw ConfigError("trajectory.a[" + std::to_string(i) + "]", "arrivals must be sorted");
    if (!(waits[i] >= 0.0))
      throw ConfigError("trajectory.l[" + std::to_string(i) + "]", "negative wait");
    if (rel_ranks[i] < 1 || rel_ranks[i] > static_cast<int>(i + 1))
      throw ConfigError("trajectory.r[" + std::to_string(i) + "]", "relative rank outside [1, i]");
    t.departures[i] = std::min(arrivals[i] + waits[i], 1.0);
  }
  t.arrivals = std::move(arrivals);
  t.waits = std::move(waits);
  t.rel_ranks = std::move(rel_ranks);
  return t;
}

/// Uniform integer in [1, i].
template <class Gen>
int uniform_rank(Gen& gen, int i) {
  return 1 + std::min(i - 1, static_cast<int>(uniform01(gen) * i));
}

template <class Gen>
Trajectory sample_instance(int n, const ArrivalModel& arrival, const WaitingModel& waiting,
                           Gen& gen) {
  if (n < 1) throw ConfigError("n", "candidate count must be >= 1");
  std::vector<double> a(n), l(n);
  std::vector<int> r(n);
  for (auto& x : a) x = sample_arrival(arrival, gen);
  std::sort(a.begin(), a.end());
  for (auto& x : l) x = sample_waiting(waiting, gen);
  // Independent uniform relative ranks are exactly the relative ranks of a
  // uniform random permutation.
  for (int i = 0; i < n; ++i) r[i] = uniform_rank(gen, i + 1);
  return make_trajectory(std::move(a), std::move(l), std::move(r));
}

/// |{i : A_i <= t}|.
inline int count_arrivals(const Trajectory& traj, double t) {
  return static_cast<int>(std::upper_bound(traj.arrivals.begin(), traj.arrivals.end(), t) -
                          traj.arrivals.begin());
}

/// A best-so-far candidate leaving while still best-so-far.
struct DecisionEvent {
  double time = 0.0;     // departure time
  int candidate = 0;     // 1-based arrival index
  int k_at_t = 0;        // K_t at the departure
  double arrival = 0.0;  // A_i of the departing candidate
  bool global_best = false;
};

namespace detail {

/// Decision events of a block of candidates numbered first_index.. whose
/// best-at-arrival flags are known. `base_count` candidates arrived before
/// the block. Candidate i yields an event iff no later flagged candidate
/// arrives in (A_i, D_i]; only the last flagged candidate is the global best.
inline std::vector<DecisionEvent> events_from_flags(int first_index, int base_count,
                                                    std::span<const double> arrivals,
                                                    std::span<const double> departures,
                                                    std::span<const std::uint8_t> flags) {
  const int m = static_cast<int>(arrivals.size());
  int last_flag = -1;
  for (int p = m - 1; p >= 0; --p)
    if (flags[p]) {
      last_flag = p;
      break;
    }
  int next = -1;
  // Walk backwards so `next` is the following flagged position.
  std::vector<DecisionEvent> reversed;
  for (int p = m - 1; p >= 0; --p) {
    if (!flags[p]) continue;
    const double d = departures[p];
    if (next < 0 || arrivals[next] > d) {
      const int later = static_cast<int>(
          std::upper_bound(arrivals.begin(), arrivals.end(), d) - arrivals.begin());
      reversed.push_back({d, first_index + p, base_count + later, arrivals[p], p == last_flag});
    }
    next = p;
  }
  return {reversed.rbegin(), reversed.rend()};
}

}  // namespace detail

inline std::vector<std::uint8_t> best_flags(const Trajectory& traj) {
  std::vector<std::uint8_t> flags(traj.rel_ranks.size());
  for (std::size_t i = 0; i < flags.size(); ++i) flags[i] = traj.rel_ranks[i] == 1;
  return flags;
}

/// Departures of candidates that are best-so-far when they leave, in time order.
inline std::vector<DecisionEvent> decision_events(const Trajectory& traj) {
  const auto flags = best_flags(traj);
  return detail::events_from_flags(1, 0, traj.arrivals, traj.departures, flags);
}

/// Snapshot of what an observer knows at time t.
struct History {
  double t = 0.0;
  std::vector<double> arrivals;
  std::vector<std::optional<double>> departures;  // nullopt: still present
  std::vector<int> rel_ranks;
};

inline History history_at(const Trajectory& traj, double t) {
  History h;
  h.t = t;
  const int k = count_arrivals(traj, t);
  h.arrivals.assign(traj.arrivals.begin(), traj.arrivals.begin() + k);
  h.rel_ranks.assign(traj.rel_ranks.begin(), traj.rel_ranks.begin() + k);
  h.departures.reserve(k);
  for (int i = 0; i < k; ++i)
    h.departures.push_back(traj.departures[i] <= t ? std::optional(traj.departures[i])
                                                   : std::nullopt);
  return h;
}

// ---------------------------------------------------------------------------
// Conditional futures
// ---------------------------------------------------------------------------

/// State after a best-so-far departure at time t with k arrivals so far.
struct ConditionalFutureSpec {
  double t = 0.0;
  int k = 0;
  int n = 1;
  ArrivalModel arrival;
  WaitingModel waiting;

  void validate() const {
    if (n < 1) throw ConfigError("spec.n", "must be >= 1");
    if (k < 0 || k > n) throw ConfigError("spec.k", "must lie in [0, n]");
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("spec.t", "must lie in [0,1]");
    if (k > 0 && !(arrival.cdf(t) > 0.0))
      throw ConfigError("spec.t", "k > 0 arrivals impossible when A(t) = 0");
    if (k < n && !(arrival.cdf(t) < 1.0))
      throw ConfigError("spec.t", "no arrival mass after t");
  }
};

enum class FutureMode { sequential, triples };

/// Candidates k+1..n: arrivals in (t, 1], waits, departures, best flags.
struct FutureSuffix {
  int k = 0;
  int n = 0;
  std::vector<double> arrivals;
  std::vector<double> waits;
  std::vector<double> departures;
  std::vector<std::uint8_t> best;
};

template <class Gen>
FutureSuffix sample_conditional_future(const ConditionalFutureSpec& spec, Gen& gen,
                                       FutureMode mode) {
  spec.validate();
  FutureSuffix f;
  f.k = spec.k;
  f.n = spec.n;
  const int m = spec.n - spec.k;
  if (m == 0) return f;
  f.arrivals.resize(m);
  f.waits.resize(m);
  f.departures.resize(m);
  f.best.resize(m);
  for (auto& a : f.arrivals) a = sample_arrival_after(spec.arrival, spec.t, gen);
  std::sort(f.arrivals.begin(), f.arrivals.end());
  for (int p = 0; p < m; ++p) {
    f.waits[p] = sample_waiting(spec.waiting, gen);
    f.departures[p] = std::min(f.arrivals[p] + f.waits[p], 1.0);
  }
  if (mode == FutureMode::sequential) {
    for (int p = 0; p < m; ++p) {
      const int index = spec.k + 1 + p;
      f.best[p] = uniform01(gen) * index < 1.0;
    }
    return f;
  }
  // Triples: m distinct labels from [n] via partial Fisher-Yates; arrivals are
  // exchangeable, so pairing labels with the sorted arrivals in draw order is
  // an arbitrary partition.
  std::vector<int> labels(spec.n);
  std::iota(labels.begin(), labels.end(), 1);
  for (int p = 0; p < m; ++p) {
    const int pick = p + std::min(spec.n - p - 1, static_cast<int>(uniform01(gen) * (spec.n - p)));
    std::swap(labels[p], labels[pick]);
  }
  int best_seen = spec.n + 1;
  for (int p = m; p < spec.n; ++p) best_seen = std::min(best_seen, labels[p]);  // undrawn
  for (int p = 0; p < m; ++p) {
    f.best[p] = labels[p] < best_seen;
    best_seen = std::min(best_seen, labels[p]);
  }
  return f;
}

inline std::vector<DecisionEvent> decision_events(const FutureSuffix& f) {
  return detail::events_from_flags(f.k + 1, f.k, f.arrivals, f.departures, f.best);
}

// ---------------------------------------------------------------------------
// Sparse sampler over best-so-far candidates only
// ---------------------------------------------------------------------------

/// Generates the decision events of a (possibly conditional) instance without
/// materializing the non-record candidates.
///
/// Works in quantile space u = A(t): the future arrivals are order statistics
/// of uniforms on (A(t0), 1]. Record indices follow Pr[next record > j | record
/// at i] = i/j; the gap between order statistics at positions i < j is
/// Beta(j-i, n-j+1) on the remaining interval; the candidates strictly between
/// two records are i.i.d. uniform on that gap, so K at a departure is a
/// binomial draw. Distributionally identical to decision_events(sample_*).
class RecordChain {
 public:
  /// Unconditional instance with n candidates.
  RecordChain(const ArrivalModel& arrival, const WaitingModel& waiting, int n)
      : RecordChain(arrival, waiting, n, 0, 0.0) {}

  /// Future after a best-so-far departure at t with k arrivals so far.
  RecordChain(const ArrivalModel& arrival, const WaitingModel& waiting, int n, int k, double t)
      : arrival_(&arrival), waiting_(&waiting), n_(n), k_(k),
        base_q_(k == 0 && t <= 0.0 ? 0.0 : arrival.cdf(t)) {}

  template <class Gen>
  std::optional<DecisionEvent> next(Gen& gen) {
    if (done_) return std::nullopt;
    if (current_ == 0) {
      const int first = k_ >= n_ ? n_ + 1 : k_ == 0 ? 1 : next_record(k_, gen);
      if (first > n_) {
        done_ = true;
        return std::nullopt;
      }
      current_ = first;
      q_ = base_q_ + (1.0 - base_q_) * beta(first - k_, n_ - first + 1, gen);
    }
    for (;;) {
      const int i = current_;
      const double v = q_;
      const double arr = arrival_->quantile(v);
      const double wait = sample_waiting(*waiting_, gen);
      const double dep = std::min(arr + wait, 1.0);
      const int j = next_record(i, gen);
      double vj = 1.0;
      int between = n_ - i;
      if (j <= n_) {
        vj = v + (1.0 - v) * beta(j - i, n_ - j + 1, gen);
        if (arrival_->quantile(vj) <= dep) {  // superseded before leaving
          current_ = j;
          q_ = vj;
          continue;
        }
        between = j - i - 1;
      }
      int later = 0;
      if (dep > arr && between > 0) {
        const double width = vj - v;
        const double frac = width > 0.0 ? std::clamp((arrival_->cdf(dep) - v) / width, 0.0, 1.0)
                                        : 1.0;
        later = std::binomial_distribution<int>(between, frac)(gen);
      }
      DecisionEvent ev{dep, i, i + later, arr, j > n_};
      if (j > n_) {
        done_ = true;
      } else {
        current_ = j;
        q_ = vj;
      }
      return ev;
    }
  }

 private:
  template <class Gen>
  int next_record(int i, Gen& gen) const {
    const double ratio = i / uniform01_open_left(gen);
    if (ratio >= n_) return n_ + 1;
    return static_cast<int>(ratio) + 1;
  }

  template <class Gen>
  static double beta(int a, int b, Gen& gen) {
    if (a == 1) return -std::expm1(std::log(uniform01_open_left(gen)) / b);
    const double x = std::gamma_distribution<double>(a, 1.0)(gen);
    const double y = std::gamma_distribution<double>(b, 1.0)(gen);
    return x / (x + y);
  }

  const ArrivalModel* arrival_;
  const WaitingModel* waiting_;
  int n_;
  int k_;
  double base_q_;
  int current_ = 0;
  double q_ = 0.0;
  bool done_ = false;
};

}  // namespace sds
