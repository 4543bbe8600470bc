#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace sds {

/// Least-squares nondecreasing fit by pool-adjacent-violators.
/// `weights` may be empty (all ones).
inline std::vector<double> isotonic_nondecreasing(std::span<const double> values,
                                                  std::span<const double> weights = {}) {
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  blocks.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    blocks.push_back({values[i], weights.empty() ? 1.0 : weights[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
      const Block top = blocks.back();
      blocks.pop_back();
      Block& prev = blocks.back();
      const double w = prev.weight + top.weight;
      prev.mean = (prev.mean * prev.weight + top.mean * top.weight) / w;
      prev.weight = w;
      prev.count += top.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

inline std::vector<double> isotonic_nonincreasing(std::span<const double> values,
                                                  std::span<const double> weights = {}) {
  std::vector<double> negated(values.begin(), values.end());
  for (auto& v : negated) v = -v;
  auto fit = isotonic_nondecreasing(negated, weights);
  for (auto& v : fit) v = -v;
  return fit;
}

}  // namespace sds
