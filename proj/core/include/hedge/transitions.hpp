#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hedge/types.hpp"

namespace hedge::transitions {

using Rows = std::vector<std::vector<double>>;

inline constexpr int kDefaultBins = 50;

/// Percentile edges of the observed daily scaling factors.
struct FactorBins {
  std::vector<double> edges;  // m + 1 strictly ascending values
  int collapsed = 0;          // edges dropped as duplicates

  [[nodiscard]] int m() const { return static_cast<int>(edges.size()) - 1; }
  /// Bin holding f; values outside the edges clamp to the first or last bin.
  [[nodiscard]] int bin_of(double f) const;
  [[nodiscard]] double lower(int bin) const { return edges[static_cast<std::size_t>(bin)]; }
  [[nodiscard]] double upper(int bin) const { return edges[static_cast<std::size_t>(bin) + 1]; }
  [[nodiscard]] double center(int bin) const { return 0.5 * (lower(bin) + upper(bin)); }
  [[nodiscard]] std::vector<double> centers() const;

  bool operator==(const FactorBins&) const = default;
};

/// Edges at the 0, 1/m, ..., 1 quantiles. Duplicate edges are collapsed,
/// lowering the effective bin count. A constant sample yields one bin of zero
/// width.
FactorBins percentile_bins(std::span<const double> factors, int m = kDefaultBins);

struct EstimatedMatrix {
  Rows counts;
  Rows probs;               // zero rows where `empty`
  std::vector<bool> empty;  // rows without observations

  [[nodiscard]] int size() const { return static_cast<int>(counts.size()); }
  [[nodiscard]] bool any_populated() const;
};

/// p_ij = n_ij / Σ_k n_ik from observed (from, to) state pairs.
EstimatedMatrix estimate_matrix(std::span<const std::pair<int, int>> pairs, int size);
EstimatedMatrix estimate_from_counts(Rows counts);

/// Fills empty rows by linear interpolation, per column, between the nearest
/// populated rows above and below at the given row positions; edge rows copy
/// the nearest populated row. Every row is renormalized to sum to 1.
Rows interpolate_gaps(const EstimatedMatrix& matrix, std::span<const double> positions);
Rows interpolate_gaps(const EstimatedMatrix& matrix);  // positions 0, 1, 2, ...

/// Empirical frequencies of labels in [0, k).
std::vector<double> initial_distribution(std::span<const int> labels, int k);

struct FactorTransitionMatrix {
  DataType data_type = DataType::load;
  DayTransition key;
  FactorBins bins;
  Rows probs;     // m x m
  Rows counts;    // observed transitions before interpolation
  int interpolated_rows = 0;

  bool operator==(const FactorTransitionMatrix&) const = default;
};

struct ClusterTransitionMatrix {
  DataType data_type = DataType::load;
  DayTransition key;
  Rows probs;                         // K x K
  std::vector<double> initial_dist;   // marginal over days of type key.from
  Rows counts;

  [[nodiscard]] int k() const { return static_cast<int>(probs.size()); }
  bool operator==(const ClusterTransitionMatrix&) const = default;
};

FactorTransitionMatrix build_factor_matrix(DataType type, DayTransition key, FactorBins bins,
                                           std::span<const std::pair<double, double>> factor_pairs);

/// Empty rows take the destination marginal of the observed pairs (uniform
/// when there are none).
ClusterTransitionMatrix build_cluster_matrix(DataType type, DayTransition key, int k,
                                             std::span<const std::pair<int, int>> cluster_pairs,
                                             std::span<const int> from_day_labels);

/// One classified home-day.
struct DayObservation {
  std::string home_id;
  Date date{};
  int cluster = 0;
  double factor = 0.0;
  bool has_factor = true;  // false excludes the day from factor pairs (EV no-travel)
};

struct TransitionPairs {
  std::map<DayTransition, std::vector<std::pair<int, int>>> clusters;
  std::map<DayTransition, std::vector<std::pair<double, double>>> factors;
};

/// Pairs from strictly consecutive calendar days of the same home, keyed by
/// day-type transition.
TransitionPairs collect_pairs(std::vector<DayObservation> observations);

/// Throws InvalidArgument unless every row sums to 1 within 1e-9 and entries lie in [0, 1].
void check_stochastic(const Rows& probs, const char* field);

}  // namespace hedge::transitions
