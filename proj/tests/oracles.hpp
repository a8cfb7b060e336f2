#pragma once

// Straight-line re-derivations of the aggregate formulas, written against
// plain nested vectors so they share no code with gseo::metrics.

#include <vector>

namespace gseo_test::oracle {

using Articles = std::vector<std::vector<double>>;

inline double pooled_mean(const Articles& a) {
  double sum = 0;
  long n = 0;
  for (const auto& scores : a)
    for (double s : scores) sum += s, ++n;
  return sum / static_cast<double>(n);
}

inline double success_rate(const Articles& a, double tau) {
  double total = 0;
  for (const auto& scores : a) {
    int hits = 0;
    for (double s : scores)
      if (s >= tau) ++hits;
    total += static_cast<double>(hits) / static_cast<double>(scores.size());
  }
  return total / static_cast<double>(a.size());
}

inline double mean_variance(const Articles& a) {
  double total = 0;
  for (const auto& scores : a) {
    double mu = 0;
    for (double s : scores) mu += s;
    mu /= static_cast<double>(scores.size());
    double var = 0;
    for (double s : scores) var += (s - mu) * (s - mu);
    total += var / static_cast<double>(scores.size());
  }
  return total / static_cast<double>(a.size());
}

}  // namespace gseo_test::oracle
