#include "hedge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hedge::stats {

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  if (sorted.size() == 1) return sorted[0];
  const double h = static_cast<double>(sorted.size() - 1) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::vector<double> sample, double q) {
  std::sort(sample.begin(), sample.end());
  return quantile_sorted(sample, q);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

Bands population_bands(std::span<const std::vector<double>> profiles) {
  if (profiles.empty()) throw std::invalid_argument("population_bands: empty population");
  const std::size_t steps = profiles.front().size();
  Bands bands;
  for (auto& s : bands.series) s.assign(steps, 0.0);
  std::vector<double> column(profiles.size());
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t i = 0; i < profiles.size(); ++i) {
      if (profiles[i].size() != steps) throw std::invalid_argument("population_bands: ragged population");
      column[i] = profiles[i][t];
    }
    std::sort(column.begin(), column.end());
    for (std::size_t k = 0; k < kBandQuantiles.size(); ++k) {
      bands.series[k][t] = quantile_sorted(column, kBandQuantiles[k]);
    }
    bands.series[5][t] = mean(column);
  }
  return bands;
}

}  // namespace hedge::stats
