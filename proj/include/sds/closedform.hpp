#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "sds/errors.hpp"

namespace sds {

/// Exponential departures with rate lambda, Poisson arrivals in the
/// large-population limit.
struct ExpModel {
  double lambda = 1.0;

  void validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw ConfigError("lambda", "rate must be finite and > 0");
  }
};

struct QuadratureConfig {
  double abs_tol = 1e-10;
  unsigned max_depth = 50;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
};

/// Integral of e^{-x} / (x - lambda)^2 over [0, lambda (1 - theta)]. The pole
/// at x = lambda sits just past the upper limit when theta is small, so the
/// integral is taken in s = ln(lambda - x), where the integrand
/// e^{-(lambda - e^s)} e^{-s} is smooth and bounded by 1/(lambda theta), and
/// handed to the adaptive Gauss-Kronrod rule.
inline QuadratureResult singular_integral(double lambda, double theta,
                                          const QuadratureConfig& q = {}) {
  ExpModel{lambda}.validate();
  if (!(theta > 0.0)) throw std::domain_error("singular_integral: theta must be > 0");
  if (theta > 1.0) throw std::domain_error("singular_integral: theta must be <= 1");
  if (!(q.abs_tol > 0.0)) throw ConfigError("quadrature.abs_tol", "must be > 0");
  if (theta == 1.0) return {0.0, 0.0};
  using Rule = boost::math::quadrature::gauss_kronrod<double, 31>;
  auto f = [lambda](double s) { return std::exp(std::exp(s) - lambda - s); };
  const double lo = std::log(lambda * theta);
  const double hi = std::log(lambda);
  // Boost's tolerance is relative; a coarse pass fixes the scale. The
  // relative target stays above 1e-12 so panels never chase rounding noise.
  const double scale = std::abs(Rule::integrate(f, lo, hi, 5, 1e-6));
  const double rel = std::clamp(scale > 0.0 ? q.abs_tol / scale : 1.0, 1e-12, 1e-3);
  QuadratureResult r;
  r.value = Rule::integrate(f, lo, hi, q.max_depth, rel, &r.error);
  // Boost reports the Kronrod-Gauss gap of each panel mapped to [-1, 1];
  // scaling by the half-span bounds the error on the original interval.
  r.error *= (hi - lo) / 2.0;
  return r;
}

/// Success probability of Threshold(theta) with exponential departures of
/// rate lambda. Evaluated in the algebraically identical form
///   a/l + a b/(theta l^2) + (theta l - 1 + e^{-l theta})/l * (ln(1/theta)
///   + (1-theta)/(l theta) - I)
/// with a = 1 - e^{-l theta}, b = 1 - e^{-l (1-theta)}, which avoids the
/// overflow of e^{l theta} for large rates.
inline double success_probability(double lambda, double theta, const QuadratureConfig& q = {}) {
  const double I = singular_integral(lambda, theta, q).value;
  const double a = -std::expm1(-lambda * theta);
  const double b = -std::expm1(-lambda * (1.0 - theta));
  const double c = lambda * theta + std::expm1(-lambda * theta);  // theta l - 1 + e^{-l theta}
  const double p = a / lambda + a * b / (theta * lambda * lambda) +
                   c / lambda * (-std::log(theta) + (1.0 - theta) / (lambda * theta) - I);
  constexpr double slack = 1e-9;
  if (!(p >= -slack && p <= 1.0 + slack))
    throw std::logic_error("success_probability out of [0,1]: " + std::to_string(p));
  return p;
}

/// Lower incomplete gamma: integral of e^{-t} t^{k-2} over [0, u].
inline double incomplete_integral(double u, int k) {
  if (!(u >= 0.0)) throw ConfigError("u", "must be >= 0");
  if (k < 2) throw ConfigError("k", "must be >= 2");
  if (u == 0.0) return 0.0;
  return boost::math::tgamma_lower(static_cast<double>(k - 1), u);
}

/// Success probability of accepting the first best-so-far departure when k
/// candidates arrive uniformly on [theta, 1] with exponential(lambda) waits.
inline double no_waiting_success(int k, double lambda, double theta) {
  if (k < 1) throw ConfigError("k", "must be >= 1");
  ExpModel{lambda}.validate();
  if (!(theta < 1.0)) throw std::domain_error("no_waiting_success: theta must be < 1");
  if (k == 1) return 1.0;
  const double u = lambda * (1.0 - theta);
  // (k-1)/u^k * gamma(k-1, u), scaled in logs to keep u^k in range.
  const double a = k - 1.0;
  const double scaled = (k - 1.0) / u *
                        std::exp(std::log(boost::math::gamma_p(a, u)) +
                                 boost::math::lgamma(a) - a * std::log(u));
  return 1.0 / k + 1.0 / u - scaled;
}

struct Maximum {
  double x = 0.0;
  double value = 0.0;
};

/// Golden-section maximization of f on [lo, hi] down to bracket width `tol`.
template <class F>
Maximum golden_section(F&& f, double lo, double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  while (hi - lo > tol) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = f(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = f(x1);
    }
  }
  const double x = 0.5 * (lo + hi);
  return {x, f(x)};
}

inline constexpr double kThetaMin = 1e-4;
inline constexpr double kThetaStep = 1e-3;
inline constexpr double kThetaTol = 1e-6;

struct OptimalThreshold {
  double lambda = 0.0;
  double theta_star = 0.0;
  double p_star = 0.0;
};

/// Grid scan over [kThetaMin, 1], then golden-section refinement in the
/// cells adjacent to the best grid point. Unimodality is not assumed.
inline OptimalThreshold optimize_threshold(double lambda, const QuadratureConfig& q = {}) {
  ExpModel{lambda}.validate();
  auto p = [&](double theta) { return success_probability(lambda, theta, q); };
  const int steps = static_cast<int>(std::ceil((1.0 - kThetaMin) / kThetaStep));
  double best_theta = 1.0, best = p(1.0);
  for (int i = 0; i < steps; ++i) {
    const double theta = kThetaMin + i * kThetaStep;
    const double v = p(theta);
    if (v > best) {
      best = v;
      best_theta = theta;
    }
  }
  const double lo = std::max(kThetaMin, best_theta - kThetaStep);
  const double hi = std::min(1.0, best_theta + kThetaStep);
  auto refined = golden_section(p, lo, hi, kThetaTol);
  if (refined.value < best) refined = {best_theta, best};
  return {lambda, refined.x, refined.value};
}

inline std::vector<OptimalThreshold> sweep(double lambda_min, double lambda_max, double step,
                                           const QuadratureConfig& q = {}) {
  if (!(lambda_min > 0.0)) throw ConfigError("lambda-min", "must be > 0");
  if (!(lambda_max >= lambda_min)) throw ConfigError("lambda-max", "must be >= lambda-min");
  if (!(step > 0.0)) throw ConfigError("step", "must be > 0");
  const auto count = static_cast<long>(std::floor((lambda_max - lambda_min) / step + 1e-9)) + 1;
  std::vector<OptimalThreshold> out;
  out.reserve(count);
  for (long i = 0; i < count; ++i) out.push_back(optimize_threshold(lambda_min + i * step, q));
  return out;
}

/// Rates of the published table; 1000 stands in for the large-rate limit.
inline const std::vector<double>& table1_lambdas() {
  static const std::vector<double> rates{0.5, 1.0, 2.0, 10.0, 1000.0};
  return rates;
}

inline std::vector<OptimalThreshold> table1(const QuadratureConfig& q = {}) {
  std::vector<OptimalThreshold> out;
  for (double l : table1_lambdas()) out.push_back(optimize_threshold(l, q));
  return out;
}

}  // namespace sds
