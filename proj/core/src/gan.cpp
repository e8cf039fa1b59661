#include "hedge/gan.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hedge::gan {

using neural::Activation;
using neural::DenseNet;

void TrainConfig::validate() const {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(field, "must be positive");
  };
  positive(lr_initial, "lr_initial");
  positive(lr_final, "lr_final");
  positive(noise_initial, "noise_initial");
  positive(noise_final, "noise_final");
  if (lr_final > lr_initial) throw InvalidArgument("lr_final", "must not exceed lr_initial");
  if (noise_final > noise_initial) throw InvalidArgument("noise_final", "must not exceed noise_initial");
  if (n_epochs < 0) throw InvalidArgument("n_epochs", "must be nonnegative");
  if (batch_size < 1) throw InvalidArgument("batch_size", "must be positive");
  if (population < 2) throw InvalidArgument("population", "must be at least 2");
  if (sum_weight < 0.0) throw InvalidArgument("sum_weight", "must be nonnegative");
  if (percentile_weight < 0.0) throw InvalidArgument("percentile_weight", "must be nonnegative");
  if (!(dropout_discriminator >= 0.0 && dropout_discriminator < 1.0)) {
    throw InvalidArgument("dropout_discriminator", "must lie in [0, 1)");
  }
  if (!(dropout_generator >= 0.0 && dropout_generator < 1.0)) {
    throw InvalidArgument("dropout_generator", "must lie in [0, 1)");
  }
  if (noise_dim < 1) throw InvalidArgument("noise_dim", "must be positive");
  for (int h : generator_hidden) {
    if (h < 1) throw InvalidArgument("generator_hidden", "must be positive");
  }
  for (int h : discriminator_hidden) {
    if (h < 1) throw InvalidArgument("discriminator_hidden", "must be positive");
  }
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw InvalidArgument("adam_beta1", "must lie in [0, 1)");
  if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw InvalidArgument("adam_beta2", "must lie in [0, 1)");
}

double schedule(double v0, double v_end, double epoch, double n_epochs) {
  if (n_epochs <= 0.0) return v0;
  if (epoch >= n_epochs) return v_end;
  return v0 * std::pow(v_end / v0, epoch / n_epochs);
}

namespace {

double clamp_score(double s) { return std::clamp(s, kScoreClamp, 1.0 - kScoreClamp); }

double mean_log(std::span<const double> scores, bool complement) {
  if (scores.empty()) return 0.0;
  double acc = 0.0;
  for (double s : scores) {
    const double c = clamp_score(s);
    acc += std::log(complement ? 1.0 - c : c);
  }
  return acc / static_cast<double>(scores.size());
}

void check_targets(const Matrix& population, const stats::Bands& targets) {
  if (targets.steps() != static_cast<std::size_t>(population.rows())) {
    throw InvalidArgument("targets", "step count does not match the population");
  }
  if (population.cols() < 2) throw InvalidArgument("population", "need at least 2 profiles");
}

// Calls visit(series, t, statistic, weights) where weights lists (column, d stat / d x).
template <typename Visit>
void for_each_statistic(const Matrix& population, Visit&& visit) {
  const auto n = population.cols();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::vector<std::pair<Eigen::Index, double>> weights;
  for (Eigen::Index t = 0; t < population.rows(); ++t) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return population(t, a) < population(t, b); });
    for (std::size_t k = 0; k < stats::kBandQuantiles.size(); ++k) {
      const double h = static_cast<double>(n - 1) * stats::kBandQuantiles[k];
      const auto lo = static_cast<std::size_t>(std::floor(h));
      const std::size_t hi = std::min(lo + 1, static_cast<std::size_t>(n - 1));
      const double frac = h - static_cast<double>(lo);
      const double v_lo = population(t, order[lo]);
      const double v_hi = population(t, order[hi]);
      weights.assign({{order[lo], 1.0 - frac}, {order[hi], frac}});
      visit(k, t, v_lo + frac * (v_hi - v_lo), weights);
    }
    const double mean = population.row(t).mean();
    weights.clear();
    for (Eigen::Index j = 0; j < n; ++j) weights.emplace_back(j, 1.0 / static_cast<double>(n));
    visit(stats::kBandSeries - 1, t, mean, weights);
  }
}

}  // namespace

double d_loss(std::span<const double> real_scores, std::span<const double> fake_scores) {
  return -mean_log(real_scores, false) - mean_log(fake_scores, true);
}

double g_adv_loss(std::span<const double> fake_scores) { return -mean_log(fake_scores, false); }

double sum_penalty(const Matrix& population, double w1) {
  if (population.cols() == 0) throw InvalidArgument("population", "must be nonempty");
  const double d = population.sum() / static_cast<double>(population.cols()) - 1.0;
  return w1 * d * d;
}

Matrix sum_penalty_grad(const Matrix& population, double w1) {
  if (population.cols() == 0) throw InvalidArgument("population", "must be nonempty");
  const double n = static_cast<double>(population.cols());
  const double d = population.sum() / n - 1.0;
  return Matrix::Constant(population.rows(), population.cols(), 2.0 * w1 * d / n);
}

double percentile_penalty(const Matrix& population, const stats::Bands& targets, double w2) {
  check_targets(population, targets);
  double acc = 0.0;
  for_each_statistic(population, [&](std::size_t k, Eigen::Index t, double stat, const auto&) {
    const double d = stat - targets.series[k][static_cast<std::size_t>(t)];
    acc += d * d;
  });
  return w2 * acc;
}

Matrix percentile_penalty_grad(const Matrix& population, const stats::Bands& targets, double w2) {
  check_targets(population, targets);
  Matrix grad = Matrix::Zero(population.rows(), population.cols());
  for_each_statistic(population, [&](std::size_t k, Eigen::Index t, double stat, const auto& weights) {
    const double d = stat - targets.series[k][static_cast<std::size_t>(t)];
    for (const auto& [col, w] : weights) grad(t, col) += 2.0 * w2 * d * w;
  });
  return grad;
}

std::string to_string(const GanKey& key) {
  return std::string(to_string(key.data_type)) + "/" + std::string(to_string(key.day_type)) + "/" +
         std::to_string(key.cluster);
}

GanWeights initial_weights(int steps, const TrainConfig& cfg, GanKey key) {
  cfg.validate();
  if (steps < 1) throw InvalidArgument("steps", "must be positive");
  std::vector<int> g_dims{cfg.noise_dim};
  g_dims.insert(g_dims.end(), cfg.generator_hidden.begin(), cfg.generator_hidden.end());
  g_dims.push_back(steps);
  std::vector<int> d_dims{steps};
  d_dims.insert(d_dims.end(), cfg.discriminator_hidden.begin(), cfg.discriminator_hidden.end());
  d_dims.push_back(1);

  GanWeights w;
  w.key = key;
  w.steps = steps;
  w.noise_dim = cfg.noise_dim;
  w.generator = DenseNet(g_dims, Activation::relu, Activation::sigmoid, cfg.dropout_generator);
  w.discriminator = DenseNet(d_dims, Activation::leaky_relu, Activation::sigmoid, cfg.dropout_discriminator);
  Rng g_init(derive_seed(cfg.seed, "generator-init"));
  Rng d_init(derive_seed(cfg.seed, "discriminator-init"));
  w.generator.initialise(g_init);
  w.discriminator.initialise(d_init);
  return w;
}

namespace {

Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double sd = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = sd * rng.normal();
  }
  return m;
}

std::span<const double> row_span(const Matrix& scores) { return {scores.data(), static_cast<std::size_t>(scores.size())}; }

}  // namespace

TrainResult train_gan(std::span<const std::vector<double>> real_profiles, const TrainConfig& cfg, GanKey key) {
  cfg.validate();
  if (real_profiles.size() < static_cast<std::size_t>(cfg.population)) {
    throw InvalidArgument("real_profiles", "fewer profiles (" + std::to_string(real_profiles.size()) +
                                               ") than the population size (" + std::to_string(cfg.population) + ")");
  }
  const std::size_t steps = real_profiles.front().size();
  if (steps == 0) throw InvalidArgument("real_profiles", "profiles are empty");
  for (const auto& p : real_profiles) {
    if (p.size() != steps) throw InvalidArgument("real_profiles", "profiles differ in length");
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-6) throw InvalidArgument("real_profiles", "profiles must be unit-sum");
  }

  TrainResult result;
  result.weights = initial_weights(static_cast<int>(steps), cfg, key);
  result.weights.targets = stats::population_bands(real_profiles);
  auto& gen = result.weights.generator;
  auto& disc = result.weights.discriminator;
  const auto& targets = result.weights.targets;

  const auto t_rows = static_cast<Eigen::Index>(steps);
  Matrix real(t_rows, static_cast<Eigen::Index>(real_profiles.size()));
  for (std::size_t j = 0; j < real_profiles.size(); ++j) {
    for (std::size_t t = 0; t < steps; ++t) real(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = real_profiles[j][t];
  }

  neural::Adam opt_g(gen, cfg.adam_beta1, cfg.adam_beta2);
  neural::Adam opt_d(disc, cfg.adam_beta1, cfg.adam_beta2);
  Rng rng(derive_seed(cfg.seed, "train"));
  std::vector<Eigen::Index> order(real_profiles.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  neural::ForwardCache g_cache;
  neural::ForwardCache d_cache;
  const double n = cfg.population;

  for (int epoch = 0; epoch < cfg.n_epochs; ++epoch) {
    const double lr = schedule(cfg.lr_initial, cfg.lr_final, epoch, cfg.n_epochs);
    const double eps = schedule(cfg.noise_initial, cfg.noise_final, epoch, cfg.n_epochs);
    EpochStats s;
    s.epoch = epoch;
    s.learning_rate = lr;
    s.noise = eps;
    rng.shuffle(order.begin(), order.end());
    int batches = 0;

    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const auto b = static_cast<Eigen::Index>(std::min(order.size() - start, static_cast<std::size_t>(cfg.batch_size)));

      // Discriminator step on b real and b generated profiles.
      Matrix d_in(t_rows, 2 * b);
      for (Eigen::Index j = 0; j < b; ++j) d_in.col(j) = real.col(order[start + static_cast<std::size_t>(j)]);
      d_in.rightCols(b) = gen.forward(normal_matrix(cfg.noise_dim, b, rng), g_cache, &rng);
      d_in += normal_matrix(t_rows, 2 * b, rng, eps);
      const Matrix scores = disc.forward(d_in, d_cache, &rng);
      Matrix d_grad(1, 2 * b);
      for (Eigen::Index j = 0; j < 2 * b; ++j) {
        const double c = clamp_score(scores(0, j));
        d_grad(0, j) = j < b ? -1.0 / (static_cast<double>(b) * c) : 1.0 / (static_cast<double>(b) * (1.0 - c));
      }
      const double ld = d_loss(row_span(scores.leftCols(b).eval()), row_span(scores.rightCols(b).eval()));
      opt_d.step(disc, disc.backward(d_cache, d_grad), lr);

      // Generator step on a population of n profiles.
      const Matrix pop = gen.forward(normal_matrix(cfg.noise_dim, cfg.population, rng), g_cache, &rng);
      const Matrix g_scores = disc.forward(pop + normal_matrix(t_rows, cfg.population, rng, eps), d_cache, &rng);
      Matrix adv_grad(1, cfg.population);
      for (Eigen::Index j = 0; j < cfg.population; ++j) adv_grad(0, j) = -1.0 / (n * clamp_score(g_scores(0, j)));
      const double lg = g_adv_loss(row_span(g_scores));
      const double l1 = sum_penalty(pop, cfg.sum_weight);
      const double l2 = percentile_penalty(pop, targets, cfg.percentile_weight);
      const double raw_l2 = percentile_penalty(pop, targets, 1.0);
      Matrix pop_grad = disc.backward(d_cache, adv_grad).input;
      pop_grad += sum_penalty_grad(pop, cfg.sum_weight);
      pop_grad += percentile_penalty_grad(pop, targets, cfg.percentile_weight);
      opt_g.step(gen, gen.backward(g_cache, pop_grad), lr);

      if (!std::isfinite(ld) || !std::isfinite(lg) || !std::isfinite(l1) || !std::isfinite(l2)) {
        throw TrainingDiverged(epoch);
      }
      s.d_loss += ld;
      s.g_adv_loss += lg;
      s.sum_penalty += l1;
      s.percentile_penalty += l2;
      s.percentile_distance += raw_l2;
      s.mean_population_sum += pop.sum() / n;
      ++batches;
    }
    const double inv = 1.0 / batches;
    s.d_loss *= inv;
    s.g_adv_loss *= inv;
    s.sum_penalty *= inv;
    s.percentile_penalty *= inv;
    s.percentile_distance *= inv;
    s.mean_population_sum *= inv;
    result.trace.push_back(s);
  }
  return result;
}

Matrix sample_matrix(const GanWeights& weights, int n, Rng& rng) {
  if (n < 1) throw InvalidArgument("n", "must be positive");
  return weights.generator.predict(normal_matrix(weights.noise_dim, n, rng));
}

std::vector<std::vector<double>> sample_population(const GanWeights& weights, int n, std::uint64_t seed) {
  Rng rng(seed);
  const Matrix m = sample_matrix(weights, n, rng);
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(j)].assign(m.col(j).data(), m.col(j).data() + m.rows());
  return out;
}

}  // namespace hedge::gan
