#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sds/errors.hpp"
#include "sds/process.hpp"

namespace sds {

struct NeverAccept {};

/// Accept a departing best-so-far iff t > theta.
struct Threshold {
  double theta = 0.0;
};

/// Classical rule: reject the first `skip` arrivals, then take the next
/// best-so-far candidate.
struct RankCutoff {
  int skip = 0;
};

/// Time-cell rule. Cell j covers (times[j], times[j+1]] (the first cell also
/// takes everything at or before times[0]); accept iff K_t > cutoffs[j].
struct BivariateGrid {
  std::vector<double> times;  // m + 1 strictly increasing points, last is 1
  std::vector<int> cutoffs;   // m entries

  int cells() const { return static_cast<int>(cutoffs.size()); }

  int cell_of(double t) const {
    auto it = std::lower_bound(times.begin() + 1, times.end(), t);
    const int j = static_cast<int>(it - (times.begin() + 1));
    return std::min(j, cells() - 1);
  }

  void validate() const {
    if (cutoffs.empty()) throw ConfigError("policy.cutoff", "grid needs at least one cell");
    if (times.size() != cutoffs.size() + 1)
      throw ConfigError("policy.t", "expected " + std::to_string(cutoffs.size() + 1) + " times");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1]))
        throw ConfigError("policy.t[" + std::to_string(i) + "]", "times must increase strictly");
    if (times.front() < 0.0 || times.back() != 1.0)
      throw ConfigError("policy.t", "grid must span [t0, 1] with t0 >= 0");
    for (std::size_t j = 0; j < cutoffs.size(); ++j)
      if (cutoffs[j] < 0) throw ConfigError("policy.cutoff[" + std::to_string(j) + "]", "negative");
  }
};

using Policy = std::variant<NeverAccept, Threshold, RankCutoff, BivariateGrid>;

inline void validate_policy(const Policy& policy) {
  if (auto* t = std::get_if<Threshold>(&policy); t && !(t->theta >= 0.0 && t->theta <= 1.0))
    throw ConfigError("policy.theta", "threshold must lie in [0,1]");
  if (auto* r = std::get_if<RankCutoff>(&policy); r && r->skip < 0)
    throw ConfigError("policy.skip", "must be >= 0");
  if (auto* g = std::get_if<BivariateGrid>(&policy)) g->validate();
}

/// What the policy sees when a best-so-far candidate departs.
struct DecisionPoint {
  double time = 0.0;
  int k = 0;
  int candidate = 0;  // arrival index of the departing candidate
};

/// Pure accept/reject decision; every rule rejects on ties.
inline bool decide(const Policy& policy, const DecisionPoint& at) {
  return std::visit(
      [&at](const auto& p) -> bool {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NeverAccept>)
          return false;
        else if constexpr (std::is_same_v<P, Threshold>)
          return at.time > p.theta;
        else if constexpr (std::is_same_v<P, RankCutoff>)
          return at.candidate > p.skip;
        else
          return at.k > p.cutoffs[p.cell_of(at.time)];
      },
      policy);
}

/// decide() for rules of (t, K_t); the departing candidate is taken to be the
/// latest arrival, which is exact when waits are zero.
inline bool decide(const Policy& policy, double t, int k) {
  return decide(policy, DecisionPoint{t, k, k});
}

struct RunOutcome {
  std::optional<int> accepted;
  bool success = false;
  std::optional<double> accept_time;
};

struct RunOptions {
  /// Candidates arriving at or before this time are never accepted.
  std::optional<double> bar_arrivals_through;
};

/// Walks decision events from `next()` (returning optional<DecisionEvent>)
/// and stops at the first acceptance.
template <class NextEvent>
RunOutcome walk_events(const Policy& policy, NextEvent&& next, const RunOptions& opts = {}) {
  RunOutcome out;
  while (auto ev = next()) {
    if (opts.bar_arrivals_through && ev->arrival <= *opts.bar_arrivals_through) continue;
    if (decide(policy, DecisionPoint{ev->time, ev->k_at_t, ev->candidate})) {
      out.accepted = ev->candidate;
      out.accept_time = ev->time;
      out.success = ev->global_best;
      return out;
    }
  }
  return out;
}

inline RunOutcome run_events(const Policy& policy, const std::vector<DecisionEvent>& events,
                             const RunOptions& opts = {}) {
  std::size_t pos = 0;
  return walk_events(
      policy,
      [&]() -> std::optional<DecisionEvent> {
        if (pos == events.size()) return std::nullopt;
        return events[pos++];
      },
      opts);
}

inline RunOutcome run_policy(const Policy& policy, const Trajectory& traj,
                             const RunOptions& opts = {}) {
  return run_events(policy, decision_events(traj), opts);
}

inline std::string policy_kind(const Policy& policy) {
  return std::visit(
      [](const auto& p) -> std::string {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, NeverAccept>) return "never";
        else if constexpr (std::is_same_v<P, Threshold>) return "threshold";
        else if constexpr (std::is_same_v<P, RankCutoff>) return "rankcutoff";
        else return "grid";
      },
      policy);
}

}  // namespace sds
