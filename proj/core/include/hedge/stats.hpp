#pragma once

#include <array>
#include <span>
#include <vector>

namespace hedge::stats {

/// Quantile of an ascending sample with linear interpolation between order
/// statistics: position h = (n - 1) q.
double quantile_sorted(std::span<const double> sorted, double q);
double quantile(std::vector<double> sample, double q);

double mean(std::span<const double> xs);

/// Levels of the per-timestep population summary, in storage order.
inline constexpr std::array<double, 5> kBandQuantiles{0.10, 0.25, 0.50, 0.75, 0.90};
inline constexpr std::size_t kBandSeries = kBandQuantiles.size() + 1;  // + mean

/// Per-timestep 10/25/50/75/90th percentiles and mean of a population.
struct Bands {
  std::array<std::vector<double>, kBandSeries> series;  // p10, p25, p50, p75, p90, mean

  [[nodiscard]] std::size_t steps() const { return series[0].size(); }
  [[nodiscard]] const std::vector<double>& p10() const { return series[0]; }
  [[nodiscard]] const std::vector<double>& p50() const { return series[2]; }
  [[nodiscard]] const std::vector<double>& p90() const { return series[4]; }
  [[nodiscard]] const std::vector<double>& mean() const { return series[5]; }
};

/// `profiles` is a list of equal-length rows.
Bands population_bands(std::span<const std::vector<double>> profiles);

}  // namespace hedge::stats
