#include "hedge/transitions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hedge/stats.hpp"

namespace hedge::transitions {

namespace {

void normalise_row(std::vector<double>& row) {
  const double sum = std::accumulate(row.begin(), row.end(), 0.0);
  if (sum <= 0.0) {
    std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
    return;
  }
  for (double& v : row) v /= sum;
}

}  // namespace

int FactorBins::bin_of(double f) const {
  const auto it = std::upper_bound(edges.begin(), edges.end(), f);
  const auto idx = static_cast<int>(it - edges.begin()) - 1;
  return std::clamp(idx, 0, m() - 1);
}

std::vector<double> FactorBins::centers() const {
  std::vector<double> out(static_cast<std::size_t>(m()));
  for (int i = 0; i < m(); ++i) out[static_cast<std::size_t>(i)] = center(i);
  return out;
}

FactorBins percentile_bins(std::span<const double> factors, int m) {
  if (m < 1) throw InvalidArgument("m", "bin count must be at least 1");
  if (factors.empty()) throw InvalidArgument("factors", "no factors to bin");
  std::vector<double> sorted(factors.begin(), factors.end());
  std::sort(sorted.begin(), sorted.end());
  FactorBins bins;
  for (int i = 0; i <= m; ++i) {
    const double q = static_cast<double>(i) / static_cast<double>(m);
    const double edge = i == m ? sorted.back() : stats::quantile_sorted(sorted, q);
    if (!bins.edges.empty() && edge <= bins.edges.back()) {
      ++bins.collapsed;
      continue;
    }
    bins.edges.push_back(edge);
  }
  if (bins.edges.size() == 1) bins.edges.push_back(bins.edges.front());  // constant sample
  return bins;
}

bool EstimatedMatrix::any_populated() const {
  return std::any_of(empty.begin(), empty.end(), [](bool e) { return !e; });
}

EstimatedMatrix estimate_from_counts(Rows counts) {
  EstimatedMatrix out;
  const std::size_t n = counts.size();
  out.probs.assign(n, std::vector<double>(n, 0.0));
  out.empty.assign(n, true);
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i].size() != n) throw InvalidArgument("counts", "matrix must be square");
    const double total = std::accumulate(counts[i].begin(), counts[i].end(), 0.0);
    if (total <= 0.0) continue;
    out.empty[i] = false;
    for (std::size_t j = 0; j < n; ++j) out.probs[i][j] = counts[i][j] / total;
  }
  out.counts = std::move(counts);
  return out;
}

EstimatedMatrix estimate_matrix(std::span<const std::pair<int, int>> pairs, int size) {
  if (size < 1) throw InvalidArgument("size", "must be positive");
  Rows counts(static_cast<std::size_t>(size), std::vector<double>(static_cast<std::size_t>(size), 0.0));
  for (const auto& [from, to] : pairs) {
    if (from < 0 || from >= size || to < 0 || to >= size) throw InvalidArgument("pairs", "state out of range");
    counts[static_cast<std::size_t>(from)][static_cast<std::size_t>(to)] += 1.0;
  }
  return estimate_from_counts(std::move(counts));
}

Rows interpolate_gaps(const EstimatedMatrix& matrix, std::span<const double> positions) {
  const std::size_t n = matrix.probs.size();
  if (positions.size() != n) throw InvalidArgument("positions", "one position per row required");
  if (!matrix.any_populated()) throw InvalidArgument("matrix", "all rows are empty");
  std::vector<std::size_t> populated;
  for (std::size_t i = 0; i < n; ++i) {
    if (!matrix.empty[i]) populated.push_back(i);
  }
  Rows out = matrix.probs;
  for (std::size_t i = 0; i < n; ++i) {
    if (!matrix.empty[i]) {
      normalise_row(out[i]);
      continue;
    }
    const auto above = std::lower_bound(populated.begin(), populated.end(), i);
    if (above == populated.begin()) {
      out[i] = matrix.probs[*above];
    } else if (above == populated.end()) {
      out[i] = matrix.probs[populated.back()];
    } else {
      const std::size_t hi = *above;
      const std::size_t lo = *(above - 1);
      const double span = positions[hi] - positions[lo];
      const double w = span > 0.0 ? (positions[i] - positions[lo]) / span : 0.5;
      for (std::size_t j = 0; j < n; ++j) {
        out[i][j] = (1.0 - w) * matrix.probs[lo][j] + w * matrix.probs[hi][j];
      }
    }
    normalise_row(out[i]);
  }
  return out;
}

Rows interpolate_gaps(const EstimatedMatrix& matrix) {
  std::vector<double> positions(matrix.probs.size());
  std::iota(positions.begin(), positions.end(), 0.0);
  return interpolate_gaps(matrix, positions);
}

std::vector<double> initial_distribution(std::span<const int> labels, int k) {
  if (k < 1) throw InvalidArgument("k", "must be positive");
  if (labels.empty()) throw InvalidArgument("labels", "must be nonempty");
  std::vector<double> dist(static_cast<std::size_t>(k), 0.0);
  for (int c : labels) {
    if (c < 0 || c >= k) throw InvalidArgument("labels", "label out of range");
    dist[static_cast<std::size_t>(c)] += 1.0;
  }
  for (double& v : dist) v /= static_cast<double>(labels.size());
  return dist;
}

FactorTransitionMatrix build_factor_matrix(DataType type, DayTransition key, FactorBins bins,
                                           std::span<const std::pair<double, double>> factor_pairs) {
  FactorTransitionMatrix out;
  out.data_type = type;
  out.key = key;
  const int m = bins.m();
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(factor_pairs.size());
  for (const auto& [a, b] : factor_pairs) pairs.emplace_back(bins.bin_of(a), bins.bin_of(b));
  auto est = estimate_matrix(pairs, m);
  if (est.any_populated()) {
    out.probs = interpolate_gaps(est, bins.centers());
  } else {
    out.probs.assign(static_cast<std::size_t>(m), std::vector<double>(static_cast<std::size_t>(m), 1.0 / m));
  }
  out.interpolated_rows = static_cast<int>(std::count(est.empty.begin(), est.empty.end(), true));
  out.counts = std::move(est.counts);
  out.bins = std::move(bins);
  return out;
}

ClusterTransitionMatrix build_cluster_matrix(DataType type, DayTransition key, int k,
                                             std::span<const std::pair<int, int>> cluster_pairs,
                                             std::span<const int> from_day_labels) {
  ClusterTransitionMatrix out;
  out.data_type = type;
  out.key = key;
  auto est = estimate_matrix(cluster_pairs, k);
  std::vector<double> marginal(static_cast<std::size_t>(k), 0.0);
  for (const auto& [from, to] : cluster_pairs) marginal[static_cast<std::size_t>(to)] += 1.0;
  normalise_row(marginal);
  out.probs = est.probs;
  for (std::size_t i = 0; i < out.probs.size(); ++i) {
    if (est.empty[i]) out.probs[i] = marginal;
  }
  if (from_day_labels.empty()) {
    out.initial_dist.assign(static_cast<std::size_t>(k), 1.0 / k);
  } else {
    out.initial_dist = initial_distribution(from_day_labels, k);
  }
  out.counts = std::move(est.counts);
  return out;
}

TransitionPairs collect_pairs(std::vector<DayObservation> observations) {
  std::sort(observations.begin(), observations.end(), [](const DayObservation& a, const DayObservation& b) {
    return a.home_id != b.home_id ? a.home_id < b.home_id : a.date < b.date;
  });
  TransitionPairs out;
  for (std::size_t i = 1; i < observations.size(); ++i) {
    const auto& prev = observations[i - 1];
    const auto& cur = observations[i];
    if (prev.home_id != cur.home_id || cur.date - prev.date != std::chrono::days{1}) continue;
    const DayTransition key{day_type_of(prev.date), day_type_of(cur.date)};
    out.clusters[key].emplace_back(prev.cluster, cur.cluster);
    if (prev.has_factor && cur.has_factor) out.factors[key].emplace_back(prev.factor, cur.factor);
  }
  return out;
}

void check_stochastic(const Rows& probs, const char* field) {
  for (const auto& row : probs) {
    if (row.size() != probs.size()) throw InvalidArgument(field, "matrix must be square");
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvalidArgument(field, "entry outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument(field, "row does not sum to 1");
  }
}

}  // namespace hedge::transitions
