#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hedge/neural.hpp"
#include "hedge/stats.hpp"
#include "hedge/types.hpp"

namespace hedge::gan {

using neural::Matrix;

struct TrainConfig {
  double lr_initial = 1e-2;     // α0
  double lr_final = 1e-3;       // α_end
  double noise_initial = 1.0;   // ε0
  double noise_final = 1e-4;    // ε_end
  int n_epochs = 200;
  int batch_size = 100;         // m
  int population = 50;          // n
  double sum_weight = 0.1;      // W1
  double percentile_weight = 100.0;  // W2
  double dropout_discriminator = 0.3;  // p_D
  double dropout_generator = 0.15;     // p_G
  int noise_dim = 32;
  std::vector<int> generator_hidden{64, 64};
  std::vector<int> discriminator_hidden{64, 32};
  double adam_beta1 = 0.5;
  double adam_beta2 = 0.999;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument naming the first offending field.
  void validate() const;
};

/// v0 (v_end / v0)^(epoch / n_epochs).
double schedule(double v0, double v_end, double epoch, double n_epochs);

inline constexpr double kScoreClamp = 1e-7;

double d_loss(std::span<const double> real_scores, std::span<const double> fake_scores);
double g_adv_loss(std::span<const double> fake_scores);

/// Penalties over a population stored one profile per column (T x n).
double sum_penalty(const Matrix& population, double w1);
double percentile_penalty(const Matrix& population, const stats::Bands& targets, double w2);
Matrix sum_penalty_grad(const Matrix& population, double w1);
Matrix percentile_penalty_grad(const Matrix& population, const stats::Bands& targets, double w2);

struct GanKey {
  DataType data_type = DataType::load;
  DayType day_type = DayType::weekday;
  int cluster = 0;

  auto operator<=>(const GanKey&) const = default;
};

std::string to_string(const GanKey& key);

struct GanWeights {
  GanKey key;
  int steps = 0;  // T
  int noise_dim = 0;
  neural::DenseNet generator;
  neural::DenseNet discriminator;
  stats::Bands targets;

  bool operator==(const GanWeights& other) const {
    return key == other.key && steps == other.steps && noise_dim == other.noise_dim &&
           generator == other.generator && discriminator == other.discriminator &&
           targets.series == other.targets.series;
  }
};

struct EpochStats {
  int epoch = 0;
  double learning_rate = 0.0;
  double noise = 0.0;
  double d_loss = 0.0;
  double g_adv_loss = 0.0;
  double sum_penalty = 0.0;
  double percentile_penalty = 0.0;
  double percentile_distance = 0.0;  // ℓ2 / W2
  double mean_population_sum = 0.0;
};

struct TrainResult {
  GanWeights weights;
  std::vector<EpochStats> trace;  // one entry per epoch, averaged over its minibatches
};

class TrainingDiverged : public std::runtime_error {
 public:
  explicit TrainingDiverged(int epoch)
      : std::runtime_error("non-finite loss at epoch " + std::to_string(epoch)), epoch_(epoch) {}
  [[nodiscard]] int epoch() const { return epoch_; }

 private:
  int epoch_;
};

/// Untrained networks with the configured architecture, initialised from the seed.
GanWeights initial_weights(int steps, const TrainConfig& cfg, GanKey key);

/// Adversarial training on unit-sum profiles of one cluster.
TrainResult train_gan(std::span<const std::vector<double>> real_profiles, const TrainConfig& cfg, GanKey key = {});

/// Generator outputs (dropout off) for n standard-normal noise vectors; T x n.
Matrix sample_matrix(const GanWeights& weights, int n, Rng& rng);
std::vector<std::vector<double>> sample_population(const GanWeights& weights, int n, std::uint64_t seed);

}  // namespace hedge::gan
