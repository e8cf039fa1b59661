#include "fixtures.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace fixture {

using namespace hedge;

Date date(int y, unsigned m, unsigned d) { return Date{std::chrono::year{y} / static_cast<int>(m) / static_cast<int>(d)}; }

DayProfile day(std::vector<double> values, Date d, DataType type, const char* home) {
  DayProfile p;
  p.home_id = home;
  p.date = d;
  p.day_type = day_type_of(d);
  p.data_type = type;
  p.values = std::move(values);
  if (type == DataType::ev) p.availability.assign(p.values.size(), 1);
  return p;
}

Labelled separable_profiles(int k, int per_cluster, int steps, std::uint64_t seed, double noise) {
  Labelled out;
  Rng rng(seed);
  for (int c = 0; c < k; ++c) {
    const double center = (c + 0.5) * steps / static_cast<double>(k);
    for (int i = 0; i < per_cluster; ++i) {
      std::vector<double> p(static_cast<std::size_t>(steps));
      for (int t = 0; t < steps; ++t) {
        const double z = (t - center) / (0.06 * steps);
        p[static_cast<std::size_t>(t)] = (0.05 + std::exp(-0.5 * z * z)) * std::exp(noise * rng.normal());
      }
      const double s = std::accumulate(p.begin(), p.end(), 0.0);
      for (double& v : p) v /= s;
      out.profiles.push_back(std::move(p));
      out.labels.push_back(c);
    }
  }
  return out;
}

ingest::ConsumptionFactors factors() { return {0.25, 0.3, 0.35, 10.0, 20.0, 80.0}; }

ingest::RawCorpus parse(const corpus::RawCorpusFiles& files) {
  std::istringstream l(files.load_csv), p(files.pv_csv), t(files.trips_csv), v(files.validity_csv);
  auto load = ingest::parse_meter(l, DataType::load);
  auto pv = ingest::parse_meter(p, DataType::pv);
  auto trips = ingest::parse_trips(t);
  return ingest::assemble_corpus(std::move(load.readings), std::move(pv.readings), std::move(trips.trips),
                                 ingest::parse_validity(v));
}

Rows corpus_cluster(int n_profiles, int archetype, int resolution_minutes, std::uint64_t seed) {
  const int n_days = 20;
  auto spec = corpus::reference_spec((n_profiles + n_days - 1) / n_days, n_days, resolution_minutes, seed);
  spec.load = {spec.load.at(static_cast<std::size_t>(archetype))};
  spec.pv.clear();
  spec.ev.clear();
  const auto raw = parse(corpus::synth_corpus(spec));
  Rows out;
  for (const auto& home : raw.homes) {
    for (const auto& [d, readings] : ingest::split_days(home.load)) {
      if (static_cast<int>(out.size()) == n_profiles) return out;
      const auto p = ingest::resample_day(readings, d, resolution_minutes, resolution_minutes);
      const double s = std::accumulate(p.values.begin(), p.values.end(), 0.0);
      std::vector<double> v = p.values;
      for (double& x : v) x /= s;
      out.push_back(std::move(v));
    }
  }
  return out;
}

gan::GanWeights tiny_gan(gan::GanKey key, int steps, std::uint64_t seed) {
  gan::TrainConfig cfg;
  cfg.noise_dim = 4;
  cfg.generator_hidden = {8};
  cfg.discriminator_hidden = {8};
  cfg.seed = seed;
  return gan::initial_weights(steps, cfg, key);
}

engine::DataTypeArtifacts chain_artifacts(DataType type, const Rows& cluster_probs, const std::vector<double>& edges,
                                          const Rows& factor_probs, int steps, std::uint64_t seed) {
  engine::DataTypeArtifacts art;
  art.data_type = type;
  art.steps = steps;
  art.population = 4;
  const int k = static_cast<int>(cluster_probs.size());
  for (DayType d : kDayTypes) {
    prep::ClusterModel model;
    model.data_type = type;
    model.day_type = d;
    model.k = k;
    model.feature_spec = type == DataType::ev ? prep::FeatureSpec::ev_features : prep::FeatureSpec::load_features;
    for (int c = 0; c < k; ++c) model.centroids.push_back({static_cast<double>(c)});
    art.cluster_models[d] = model;
    for (int c = 0; c < k; ++c) {
      const gan::GanKey key{type, d, c};
      art.gans.emplace(key, tiny_gan(key, steps, derive_seed(seed, gan::to_string(key))));
    }
  }
  transitions::FactorBins bins;
  bins.edges = edges;
  std::vector<double> uniform(static_cast<std::size_t>(k), 1.0 / k);
  for (const auto& key : kDayTransitions) {
    transitions::ClusterTransitionMatrix cm;
    cm.data_type = type;
    cm.key = key;
    cm.probs = cluster_probs;
    cm.initial_dist = uniform;
    art.cluster_matrices[key] = cm;
    transitions::FactorTransitionMatrix fm;
    fm.data_type = type;
    fm.key = key;
    fm.bins = bins;
    fm.probs = factor_probs;
    art.factor_matrices[key] = fm;
  }
  art.factor_marginal.assign(factor_probs.size(), 1.0 / static_cast<double>(factor_probs.size()));
  return art;
}

}  // namespace fixture
