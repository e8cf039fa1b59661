#include "hedge/generator.hpp"

#include <numeric>

namespace hedge::engine {

namespace {

std::string key_name(DataType type, DayTransition key) {
  return std::string(to_string(type)) + "/transitions_" + std::string(to_string(key.from)) + "_" +
         std::string(to_string(key.to));
}

int sample_row(Rng& rng, const std::vector<double>& row) { return static_cast<int>(rng.categorical(row)); }

double sample_in_bin(Rng& rng, const transitions::FactorBins& bins, int bin) {
  return rng.uniform(bins.lower(bin), bins.upper(bin));
}

}  // namespace

bool DataTypeArtifacts::month_grouped() const {
  const auto it = cluster_models.find(DayType::weekday);
  return it != cluster_models.end() ? it->second.feature_spec == prep::FeatureSpec::month_group
                                    : data_type == DataType::pv;
}

std::optional<int> DataTypeArtifacts::no_travel_cluster() const {
  for (const auto& [day, model] : cluster_models) {
    if (model.no_travel_cluster) return model.no_travel_cluster;
  }
  return std::nullopt;
}

const gan::GanWeights& DataTypeArtifacts::gan(DayType day, int cluster) const {
  const gan::GanKey key{data_type, day, cluster};
  const auto it = gans.find(key);
  if (it == gans.end()) throw MissingArtifact(gan::to_string(key) + "/gan.json");
  return it->second;
}

const transitions::ClusterTransitionMatrix& DataTypeArtifacts::cluster_matrix(DayTransition key) const {
  const auto it = cluster_matrices.find(key);
  if (it == cluster_matrices.end()) throw MissingArtifact(key_name(data_type, key) + " (clusters)");
  return it->second;
}

const transitions::FactorTransitionMatrix& DataTypeArtifacts::factor_matrix(DayTransition key) const {
  const auto it = factor_matrices.find(key);
  if (it == factor_matrices.end()) throw MissingArtifact(key_name(data_type, key) + " (factors)");
  return it->second;
}

const transitions::FactorBins& DataTypeArtifacts::bins() const {
  return factor_matrix(kDayTransitions.front()).bins;
}

void DataTypeArtifacts::check_complete() const {
  for (const auto& key : kDayTransitions) {
    (void)factor_matrix(key);
    if (!month_grouped()) (void)cluster_matrix(key);
  }
  if (factor_marginal.size() != static_cast<std::size_t>(bins().m())) {
    throw MissingArtifact(std::string(to_string(data_type)) + "/factor marginal");
  }
  const auto no_travel = no_travel_cluster();
  for (DayType day : kDayTypes) {
    if (month_grouped()) continue;  // months absent from the training data fail when reached
    {
      const int k = cluster_matrix({day, day}).k();
      for (int c = 0; c < k; ++c) {
        if (no_travel && c == *no_travel) continue;
        (void)gan(day, c);
      }
    }
  }
}

HomeState init_home(const DataTypeArtifacts& artifacts, std::string home_id, Date first_day, std::uint64_t seed) {
  HomeState state;
  state.home_id = std::move(home_id);
  state.data_type = artifacts.data_type;
  state.rng = Rng(seed);
  state.day_type = day_type_of(first_day);
  if (artifacts.month_grouped()) {
    state.cluster = static_cast<int>(month_of(first_day));
  } else {
    const auto& matrix = artifacts.cluster_matrix({state.day_type, state.day_type});
    state.cluster = sample_row(state.rng, matrix.initial_dist);
  }
  const auto& bins = artifacts.bins();
  if (artifacts.factor_marginal.size() != static_cast<std::size_t>(bins.m())) {
    throw MissingArtifact(std::string(to_string(artifacts.data_type)) + "/factor marginal");
  }
  state.factor_bin = sample_row(state.rng, artifacts.factor_marginal);
  state.factor = sample_in_bin(state.rng, bins, state.factor_bin);
  state.fresh = true;
  return state;
}

GeneratedDay next_day(const DataTypeArtifacts& artifacts, HomeState& state, Date date) {
  const DayType next_type = day_type_of(date);
  if (!state.fresh) {
    const DayTransition key{state.day_type, next_type};
    if (artifacts.month_grouped()) {
      state.cluster = static_cast<int>(month_of(date));
    } else {
      const auto& cm = artifacts.cluster_matrix(key);
      state.cluster = sample_row(state.rng, cm.probs.at(static_cast<std::size_t>(state.cluster)));
    }
    const auto no_travel = artifacts.no_travel_cluster();
    if (!(no_travel && state.cluster == *no_travel)) {
      const auto& fm = artifacts.factor_matrix(key);
      state.factor_bin = sample_row(state.rng, fm.probs.at(static_cast<std::size_t>(state.factor_bin)));
      state.factor = sample_in_bin(state.rng, fm.bins, state.factor_bin);
    }
  }
  state.fresh = false;
  state.day_type = next_type;

  GeneratedDay day;
  day.date = date;
  day.cluster = state.cluster;
  day.factor_bin = state.factor_bin;
  const auto steps = static_cast<std::size_t>(artifacts.steps);
  const auto no_travel = artifacts.no_travel_cluster();
  if (no_travel && state.cluster == *no_travel) {
    day.values.assign(steps, 0.0);
    day.availability.assign(steps, 1);
    day.factor = 0.0;
    return day;
  }

  const auto& weights = artifacts.gan(next_type, state.cluster);
  const gan::Matrix population = gan::sample_matrix(weights, artifacts.population, state.rng);
  const auto pick = static_cast<Eigen::Index>(state.rng.below(static_cast<std::uint64_t>(population.cols())));
  const double sum = population.col(pick).sum();
  day.factor = state.factor;
  day.values.resize(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    day.values[t] = state.factor * population(static_cast<Eigen::Index>(t), pick) / sum;
  }
  if (artifacts.data_type == DataType::ev) day.availability = derive_availability(day.values, artifacts.driving_threshold);
  return day;
}

std::vector<GeneratedDay> generate_sequence(const DataTypeArtifacts& artifacts, const std::string& home_id,
                                            Date first_day, int n_days, std::uint64_t seed) {
  if (n_days < 0) throw InvalidArgument("n_days", "must be nonnegative");
  auto state = init_home(artifacts, home_id, first_day, seed);
  std::vector<GeneratedDay> out;
  out.reserve(static_cast<std::size_t>(n_days));
  for (int i = 0; i < n_days; ++i) out.push_back(next_day(artifacts, state, first_day + std::chrono::days{i}));
  return out;
}

std::vector<std::uint8_t> derive_availability(const std::vector<double>& ev_values, double relative_threshold) {
  const std::size_t n = ev_values.size();
  std::vector<std::uint8_t> avail(n, 1);
  const double total = std::accumulate(ev_values.begin(), ev_values.end(), 0.0);
  if (total <= 0.0) return avail;
  const double threshold = relative_threshold * total;

  std::vector<std::pair<std::size_t, std::size_t>> blocks;  // [first, last] driving steps
  for (std::size_t t = 0; t < n; ++t) {
    if (ev_values[t] <= threshold) continue;
    if (!blocks.empty() && blocks.back().second + 1 == t) {
      blocks.back().second = t;
    } else {
      blocks.emplace_back(t, t);
    }
  }
  for (std::size_t b = 0; b < blocks.size(); b += 2) {
    const std::size_t first = blocks[b].first;
    const std::size_t last = b + 1 < blocks.size() ? blocks[b + 1].second : blocks[b].second;
    for (std::size_t t = first; t <= last; ++t) avail[t] = 0;
  }
  return avail;
}

}  // namespace hedge::engine
