#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "dgforge/codegen.hpp"
#include "dgforge/executor.hpp"
#include "dgforge/layout.hpp"

namespace test {

inline std::vector<double> random_vector(std::size_t n, unsigned seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

/// Random values on data words, zero on padding.
inline std::vector<double> random_field(const dgforge::MicroblockLayout& layout, unsigned seed) {
  auto v = random_vector(layout.total_words(), seed);
  for (std::int64_t w = 0; w < layout.total_words(); ++w) {
    if (!layout.is_data_word(w)) v[w] = 0.0;
  }
  return v;
}

inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0 ? num / den : num;
}

}  // namespace test
