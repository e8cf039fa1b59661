#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hedge/gan.hpp"
#include "hedge/prep.hpp"
#include "hedge/random.hpp"
#include "hedge/transitions.hpp"
#include "hedge/types.hpp"

namespace hedge::engine {

inline constexpr double kDrivingThreshold = 1e-6;

/// Everything the Markov chain needs for one data type.
struct DataTypeArtifacts {
  DataType data_type = DataType::load;
  int steps = 0;
  int population = 50;
  double driving_threshold = kDrivingThreshold;  // ev: share of the daily total that counts as driving
  std::map<DayType, prep::ClusterModel> cluster_models;
  std::map<DayTransition, transitions::ClusterTransitionMatrix> cluster_matrices;  // absent for month-grouped data
  std::map<DayTransition, transitions::FactorTransitionMatrix> factor_matrices;
  std::vector<double> factor_marginal;  // empirical bin frequencies
  std::map<gan::GanKey, gan::GanWeights> gans;

  [[nodiscard]] bool month_grouped() const;
  [[nodiscard]] std::optional<int> no_travel_cluster() const;
  [[nodiscard]] const gan::GanWeights& gan(DayType day, int cluster) const;
  [[nodiscard]] const transitions::ClusterTransitionMatrix& cluster_matrix(DayTransition key) const;
  [[nodiscard]] const transitions::FactorTransitionMatrix& factor_matrix(DayTransition key) const;
  [[nodiscard]] const transitions::FactorBins& bins() const;

  /// Throws MissingArtifact naming the first absent piece.
  void check_complete() const;
};

struct HomeState {
  std::string home_id;
  DataType data_type = DataType::load;
  int cluster = 0;
  int factor_bin = 0;
  double factor = 0.0;
  DayType day_type = DayType::weekday;
  Rng rng;
  bool fresh = true;  // the initial state has not been emitted yet
};

struct GeneratedDay {
  Date date{};
  std::vector<double> values;             // kWh per step
  std::vector<std::uint8_t> availability;  // ev only
  int cluster = 0;
  int factor_bin = 0;
  double factor = 0.0;
};

/// Initial cluster from the first day's initial distribution, factor bin from
/// the empirical marginal, factor uniform within the bin.
HomeState init_home(const DataTypeArtifacts& artifacts, std::string home_id, Date first_day, std::uint64_t seed);

/// Emits the day for `date` and advances the state. The first call after
/// init_home emits the initial state without a transition.
GeneratedDay next_day(const DataTypeArtifacts& artifacts, HomeState& state, Date date);

/// Consecutive days starting at `first_day`.
std::vector<GeneratedDay> generate_sequence(const DataTypeArtifacts& artifacts, const std::string& home_id,
                                            Date first_day, int n_days, std::uint64_t seed);

/// Away-from-home flags from EV consumption: steps with consumption above
/// `relative_threshold` of the daily total are unavailable, and each
/// outbound/return pair of driving blocks is joined into one away span.
std::vector<std::uint8_t> derive_availability(const std::vector<double>& ev_values,
                                              double relative_threshold = kDrivingThreshold);

}  // namespace hedge::engine
