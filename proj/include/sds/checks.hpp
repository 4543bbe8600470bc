#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "sds/distributions.hpp"
#include "sds/errors.hpp"
#include "sds/process.hpp"
#include "sds/random.hpp"

namespace sds {

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit. Cells with zero expected probability must stay
/// empty; any hit there yields p = 0.
inline ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& observed,
                                      const std::vector<double>& probabilities) {
  if (observed.size() != probabilities.size())
    throw ConfigError("chi_square", "observed and expected sizes differ");
  std::uint64_t total = 0;
  for (auto o : observed) total += o;
  ChiSquareResult r;
  int cells = 0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (probabilities[i] <= 0.0) {
      if (observed[i] > 0) return {std::numeric_limits<double>::infinity(), 0, 0.0};
      continue;
    }
    const double e = probabilities[i] * static_cast<double>(total);
    const double d = static_cast<double>(observed[i]) - e;
    r.statistic += d * d / e;
    ++cells;
  }
  r.dof = cells - 1;
  if (r.dof < 1) return r;
  boost::math::chi_squared_distribution<double> dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, r.statistic));
  return r;
}

/// Exact law of the future best-flag pattern: candidate j is best-so-far at
/// arrival with probability 1/j, independently. Bit p of the pattern index is
/// candidate k+1+p.
inline std::vector<double> best_pattern_law(int n, int k) {
  const int m = n - k;
  std::vector<double> law(std::size_t{1} << m, 1.0);
  for (std::size_t pattern = 0; pattern < law.size(); ++pattern)
    for (int p = 0; p < m; ++p) {
      const double q = 1.0 / (k + 1 + p);
      law[pattern] *= (pattern >> p) & 1 ? q : 1.0 - q;
    }
  return law;
}

inline std::size_t best_pattern(const FutureSuffix& f) {
  std::size_t pattern = 0;
  for (std::size_t p = 0; p < f.best.size(); ++p)
    if (f.best[p]) pattern |= std::size_t{1} << p;
  return pattern;
}

/// Chi-square test of a conditional-future sampler's best-flag patterns
/// against the exact law.
inline ChiSquareResult sampler_pattern_test(const ConditionalFutureSpec& spec, FutureMode mode,
                                            std::uint64_t samples, std::uint64_t seed) {
  spec.validate();
  if (spec.n - spec.k > 16) throw ConfigError("spec", "pattern test needs n - k <= 16");
  const auto law = best_pattern_law(spec.n, spec.k);
  std::vector<std::uint64_t> counts(law.size(), 0);
  const std::uint64_t tag =
      stream_tag({streams::kCheck, static_cast<std::uint64_t>(spec.n),
                  static_cast<std::uint64_t>(spec.k), static_cast<std::uint64_t>(mode)});
  for (std::uint64_t i = 0; i < samples; ++i) {
    auto gen = make_stream(seed, tag, i);
    ++counts[best_pattern(sample_conditional_future(spec, gen, mode))];
  }
  return chi_square_gof(counts, law);
}

}  // namespace sds
