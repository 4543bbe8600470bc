#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sds/errors.hpp"
#include "sds/random.hpp"

namespace sds {

namespace detail {

inline constexpr double kMassTolerance = 1e-12;

/// Monotone piecewise-linear CDF through (x_i, F_i); flat below and above.
class LinearCdf {
 public:
  LinearCdf() = default;

  LinearCdf(std::vector<std::pair<double, double>> points, const std::string& field)
      : points_(std::move(points)) {
    if (points_.size() < 2) throw ConfigError(field, "needs at least two grid points");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      const auto [x, f] = points_[i];
      if (!std::isfinite(x) || !std::isfinite(f))
        throw ConfigError(field + "[" + std::to_string(i) + "]", "non-finite value");
      if (i > 0 && !(x > points_[i - 1].first))
        throw ConfigError(field + "[" + std::to_string(i) + "]", "grid must be strictly increasing");
      if (i > 0 && f < points_[i - 1].second)
        throw ConfigError(field + "[" + std::to_string(i) + "]", "cdf must be nondecreasing");
    }
    if (std::abs(points_.front().second) > kMassTolerance)
      throw ConfigError(field + "[0]", "cdf must start at 0");
    if (std::abs(points_.back().second - 1.0) > kMassTolerance)
      throw ConfigError(field + "[" + std::to_string(points_.size() - 1) + "]", "cdf must end at 1");
    points_.front().second = 0.0;
    points_.back().second = 1.0;
  }

  double cdf(double x) const {
    if (x <= points_.front().first) return 0.0;
    if (x >= points_.back().first) return 1.0;
    auto hi = std::upper_bound(points_.begin(), points_.end(), x,
                               [](double v, const auto& p) { return v < p.first; });
    auto lo = std::prev(hi);
    const double w = (x - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
  }

  /// Generalized inverse inf{x : F(x) >= u}.
  double quantile(double u) const {
    if (u <= 0.0) {
      // Leftmost point where the CDF starts to rise.
      auto it = std::find_if(points_.begin(), points_.end(),
                             [](const auto& p) { return p.second > 0.0; });
      return std::prev(it)->first;
    }
    if (u >= 1.0) {
      return std::find_if(points_.begin(), points_.end(),
                          [](const auto& p) { return p.second >= 1.0; })
          ->first;
    }
    auto hi = std::lower_bound(points_.begin(), points_.end(), u,
                               [](const auto& p, double v) { return p.second < v; });
    auto lo = std::prev(hi);
    const double w = (u - lo->second) / (hi->second - lo->second);
    return lo->first + w * (hi->first - lo->first);
  }

  const std::vector<std::pair<double, double>>& points() const { return points_; }

 private:
  std::vector<std::pair<double, double>> points_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Arrival distributions on [0, 1]
// ---------------------------------------------------------------------------

struct Uniform01 {};

struct Segment {
  double lo;
  double hi;
  double mass;
};

/// Uniform density on each segment, scaled to the segment's mass.
class PiecewiseUniform {
 public:
  explicit PiecewiseUniform(std::vector<Segment> segments) : segments_(std::move(segments)) {
    const std::string field = "arrival.segments";
    if (segments_.empty()) throw ConfigError(field, "at least one segment required");
    double total = 0.0;
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      const auto& s = segments_[i];
      const std::string f = field + "[" + std::to_string(i) + "]";
      if (!(s.lo >= 0.0 && s.hi <= 1.0)) throw ConfigError(f, "interval must lie in [0,1]");
      if (!(s.hi > s.lo)) throw ConfigError(f, "zero-width or reversed interval");
      if (!(s.mass >= 0.0) || !std::isfinite(s.mass)) throw ConfigError(f + ".mass", "must be >= 0");
      if (i > 0 && s.lo < segments_[i - 1].hi)
        throw ConfigError(f, "segments must be sorted and non-overlapping");
      total += s.mass;
    }
    if (std::abs(total - 1.0) > detail::kMassTolerance)
      throw ConfigError(field, "masses sum to " + std::to_string(total) + ", expected 1");

    std::vector<std::pair<double, double>> pts;
    double cum = 0.0;
    if (segments_.front().lo > 0.0) pts.emplace_back(0.0, 0.0);
    for (const auto& s : segments_) {
      if (pts.empty() || pts.back().first < s.lo) pts.emplace_back(s.lo, cum);
      cum += s.mass;
      pts.emplace_back(s.hi, cum);
    }
    if (pts.back().first < 1.0) pts.emplace_back(1.0, cum);
    for (auto& p : pts) p.second /= cum;
    cdf_ = detail::LinearCdf(std::move(pts), field);
  }

  const std::vector<Segment>& segments() const { return segments_; }
  double cdf(double t) const { return cdf_.cdf(t); }
  double quantile(double u) const { return cdf_.quantile(u); }

 private:
  std::vector<Segment> segments_;
  detail::LinearCdf cdf_;
};

/// Arrival CDF given on a grid of (t, A(t)) and interpolated linearly.
class TabulatedArrival {
 public:
  explicit TabulatedArrival(std::vector<std::pair<double, double>> points) {
    for (std::size_t i = 0; i < points.size(); ++i)
      if (points[i].first < 0.0 || points[i].first > 1.0)
        throw ConfigError("arrival.grid[" + std::to_string(i) + "]", "time outside [0,1]");
    cdf_ = detail::LinearCdf(std::move(points), "arrival.grid");
  }

  const std::vector<std::pair<double, double>>& points() const { return cdf_.points(); }
  double cdf(double t) const { return cdf_.cdf(t); }
  double quantile(double u) const { return cdf_.quantile(u); }

 private:
  detail::LinearCdf cdf_;
};

/// Distribution of a candidate's arrival time, with CDF A(t) on [0, 1].
/// Every variant is atomless, so A(quantile(u)) == u.
class ArrivalModel {
 public:
  using Variant = std::variant<Uniform01, PiecewiseUniform, TabulatedArrival>;

  ArrivalModel() = default;
  ArrivalModel(Variant v) : v_(std::move(v)) {}  // NOLINT(google-explicit-constructor)

  static ArrivalModel uniform() { return ArrivalModel(Uniform01{}); }
  static ArrivalModel piecewise(std::vector<Segment> segments) {
    return ArrivalModel(PiecewiseUniform(std::move(segments)));
  }
  static ArrivalModel tabulated(std::vector<std::pair<double, double>> points) {
    return ArrivalModel(TabulatedArrival(std::move(points)));
  }

  double cdf(double t) const {
    return std::visit(
        [t](const auto& m) -> double {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Uniform01>)
            return std::clamp(t, 0.0, 1.0);
          else
            return m.cdf(t);
        },
        v_);
  }

  double quantile(double u) const {
    return std::visit(
        [u](const auto& m) -> double {
          if constexpr (std::is_same_v<std::decay_t<decltype(m)>, Uniform01>)
            return std::clamp(u, 0.0, 1.0);
          else
            return m.quantile(u);
        },
        v_);
  }

  bool is_uniform() const { return std::holds_alternative<Uniform01>(v_); }
  bool is_continuous() const { return true; }
  const Variant& variant() const { return v_; }

 private:
  Variant v_ = Uniform01{};
};

template <class Gen>
double sample_arrival(const ArrivalModel& model, Gen& gen) {
  return model.quantile(uniform01(gen));
}

/// Arrival conditioned on (t, 1], by inverse transform on the restricted CDF.
template <class Gen>
double sample_arrival_after(const ArrivalModel& model, double t, Gen& gen) {
  const double base = model.cdf(t);
  const double u = base + (1.0 - base) * uniform01_open_left(gen);
  return model.quantile(u);
}

inline double cdf_arrival(const ArrivalModel& model, double t) { return model.cdf(t); }

// ---------------------------------------------------------------------------
// Waiting-time distributions
// ---------------------------------------------------------------------------

struct PointMass {
  double value = 0.0;
};

struct Exponential {
  double rate = 1.0;
};

class TabulatedWaiting {
 public:
  explicit TabulatedWaiting(std::vector<std::pair<double, double>> points) {
    for (std::size_t i = 0; i < points.size(); ++i)
      if (points[i].first < 0.0)
        throw ConfigError("waiting.grid[" + std::to_string(i) + "]", "negative duration");
    cdf_ = detail::LinearCdf(std::move(points), "waiting.grid");
  }

  const std::vector<std::pair<double, double>>& points() const { return cdf_.points(); }
  double cdf(double x) const { return cdf_.cdf(x); }
  double quantile(double u) const { return cdf_.quantile(u); }

 private:
  detail::LinearCdf cdf_;
};

/// Distribution of the time a candidate is willing to wait.
class WaitingModel {
 public:
  using Variant = std::variant<PointMass, Exponential, TabulatedWaiting>;

  WaitingModel() = default;
  WaitingModel(Variant v) : v_(std::move(v)) {  // NOLINT(google-explicit-constructor)
    if (auto* p = std::get_if<PointMass>(&v_); p && !(p->value >= 0.0 && std::isfinite(p->value)))
      throw ConfigError("waiting.value", "point mass must be a finite duration >= 0");
    if (auto* e = std::get_if<Exponential>(&v_); e && !(e->rate > 0.0 && std::isfinite(e->rate)))
      throw ConfigError("waiting.rate", "exponential rate must be finite and > 0");
  }

  static WaitingModel point(double c) { return WaitingModel(PointMass{c}); }
  static WaitingModel exponential(double rate) { return WaitingModel(Exponential{rate}); }
  static WaitingModel tabulated(std::vector<std::pair<double, double>> points) {
    return WaitingModel(TabulatedWaiting(std::move(points)));
  }

  /// Pr[L <= x].
  double cdf(double x) const {
    return std::visit(
        [x](const auto& m) -> double {
          using M = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<M, PointMass>)
            return x >= m.value ? 1.0 : 0.0;
          else if constexpr (std::is_same_v<M, Exponential>)
            return x <= 0.0 ? 0.0 : -std::expm1(-m.rate * x);
          else
            return m.cdf(x);
        },
        v_);
  }

  const Variant& variant() const { return v_; }

 private:
  Variant v_ = PointMass{0.0};
};

template <class Gen>
double sample_waiting(const WaitingModel& model, Gen& gen) {
  return std::visit(
      [&gen](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, PointMass>)
          return m.value;
        else if constexpr (std::is_same_v<M, Exponential>)
          return -std::log(uniform01_open_left(gen)) / m.rate;
        else
          return m.quantile(uniform01(gen));
      },
      model.variant());
}

// ---------------------------------------------------------------------------
// Poisson arrival process
// ---------------------------------------------------------------------------

/// Homogeneous Poisson process on [0, 1] with `rate` expected arrivals.
/// Given the count, arrival times are i.i.d. uniform.
struct PoissonArrivals {
  double rate = 1.0;
};

template <class Gen>
int sample_count(const PoissonArrivals& p, Gen& gen) {
  if (!(p.rate > 0.0)) throw ConfigError("arrivals.rate", "Poisson rate must be > 0");
  std::poisson_distribution<int> dist(p.rate);
  return dist(gen);
}

}  // namespace sds
