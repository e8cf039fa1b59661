#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "hedge/gan.hpp"
#include "hedge/neural.hpp"
#include "hedge/stats.hpp"

namespace hedge::eval {

/// Per-timestep 10/25/50/75/90th percentiles and mean; needs >= 2 profiles.
stats::Bands percentile_bands(std::span<const std::vector<double>> profiles);

/// CSV with header `t,p10,p25,p50,p75,p90,mean`.
void write_bands_csv(std::ostream& out, const stats::Bands& bands);

/// Fraction of values[t] lying within [lo[t], hi[t]].
double band_coverage(std::span<const double> lo, std::span<const double> hi, std::span<const double> values);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Per-label shuffled split; each label contributes round(train_fraction * count)
/// training items, at least one of each side when the label has two or more.
Split stratified_split(std::span<const int> labels, double train_fraction, Rng& rng);

struct ClassifierConfig {
  int hidden = 32;
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-2;
};

/// Dense softmax classifier over profiles scaled by their length.
class ProfileClassifier {
 public:
  ProfileClassifier(int steps, int classes, const ClassifierConfig& cfg, std::uint64_t seed);
  void fit(std::span<const std::vector<double>> profiles, std::span<const int> labels);
  [[nodiscard]] int predict(std::span<const double> profile) const;
  [[nodiscard]] double accuracy(std::span<const std::vector<double>> profiles, std::span<const int> labels) const;

 private:
  neural::Matrix to_matrix(std::span<const std::vector<double>> profiles) const;
  int steps_;
  int classes_;
  ClassifierConfig cfg_;
  std::uint64_t seed_;
  neural::DenseNet net_;
};

struct EvalConfig {
  gan::TrainConfig gan;
  ClassifierConfig classifier;
  int repetitions = 10;
  double train_fraction = 0.8;
  int min_cluster_size = 5;
  int synthetic_per_cluster = 0;  // 0: the largest per-cluster training count
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::vector<int> clusters;           // labels evaluated, in class-index order
  std::vector<int> excluded_clusters;  // fewer than min_cluster_size profiles
  double random_baseline = 0.0;        // 1 / K
  std::optional<double> centroid_baseline_accuracy;
  int repetitions = 0;
  std::vector<double> tstr_per_repetition;
  std::vector<double> trts_per_repetition;
  double tstr_accuracy = 0.0;
  double trts_accuracy = 0.0;
};

/// Cluster predicted by a non-learned reference (e.g. nearest centroid).
using BaselineClassifier = std::function<int(const std::vector<double>&)>;

/// TSTR and TRTS over `repetitions` fresh splits. Each repetition trains one
/// GAN per cluster on the 80% split; TSTR trains the classifier on an equal
/// number of synthetic profiles per cluster and tests on the real 20%, TRTS
/// trains on the real 20% and tests on the synthetic profiles.
EvalReport evaluate(std::span<const std::vector<double>> profiles, std::span<const int> labels,
                    const EvalConfig& cfg, const BaselineClassifier& baseline = {});

}  // namespace hedge::eval
