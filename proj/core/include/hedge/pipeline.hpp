#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hedge/gan.hpp"
#include "hedge/generator.hpp"
#include "hedge/ingest.hpp"
#include "hedge/prep.hpp"
#include "hedge/transitions.hpp"

namespace hedge::pipeline {

struct PrepareConfig {
  int resolution_minutes = 60;
  int n_segments = 4;
  ingest::ConsumptionFactors factors;
  prep::FillMethod fill_method = prep::FillMethod::linear;
  int load_clusters = 4;
  int ev_clusters = 3;
  int factor_bins = transitions::kDefaultBins;
  int kmeans_restarts = 10;
  int kmeans_max_iter = 100;
  double fill_mask_fraction = 0.05;
  bool validity_supplied = true;  // homes without a validity row are discarded
  std::uint64_t seed = 0;

  void validate() const;
};

struct PreparedDay {
  std::string home_id;
  Date date{};
  DataType data_type = DataType::load;
  prep::NormalisedProfile profile;
  double factor = 0.0;
  int cluster = 0;

  [[nodiscard]] DayType day_type() const { return day_type_of(date); }
};

struct PrepareCounters {
  std::size_t homes_in = 0;
  std::size_t homes_unconfirmed = 0;
  std::size_t homes_inconsistent = 0;
  std::size_t homes_without_validity = 0;
  std::size_t readings_outside_validity = 0;
  std::size_t days_resampled = 0;
  std::size_t days_filled = 0;
  std::size_t days_discarded_gaps = 0;
  std::size_t ev_days = 0;
  std::size_t ev_days_discarded_overlap = 0;
  std::size_t trips_removed_unclassified = 0;
  std::size_t trips_removed_hourly = 0;
  std::size_t trips_removed_daily = 0;
  std::map<DataType, int> bins_collapsed;
};

struct PreparedData {
  int steps = 0;
  std::vector<PreparedDay> days;  // sorted by (data_type, home_id, date)
  std::map<DataType, engine::DataTypeArtifacts> artifacts;  // everything except GAN weights
  std::optional<prep::FillComparisonReport> fill_report;    // on gap-free load days
  PrepareCounters counters;
};

/// Cleaned, gap-filled daily profiles of one home, before normalisation.
struct HomeDays {
  std::vector<DayProfile> load;
  std::vector<DayProfile> pv;
  std::vector<DayProfile> ev;
  PrepareCounters counters;
};

HomeDays process_home(const ingest::HomeRecords& home, const PrepareConfig& cfg);

/// ingest -> gap filling -> normalisation -> clustering -> transition tables.
/// Segments are processed concurrently.
PreparedData prepare(const ingest::RawCorpus& corpus, const PrepareConfig& cfg);

/// Feature/month-group cluster model fitted on one (data_type, day_type) set.
prep::ClusterModel fit_cluster_model(DataType type, DayType day, const std::vector<prep::NormalisedProfile>& profiles,
                                     const PrepareConfig& cfg);

/// Unit-sum training profiles of one GAN key (zero days excluded).
std::vector<std::vector<double>> training_profiles(const PreparedData& data, const gan::GanKey& key);

struct TrainOptions {
  gan::TrainConfig gan;
  int max_profiles_per_cluster = 0;  // 0 keeps every profile
  int min_profiles = 2;              // keys with fewer profiles get no GAN
};

struct TrainedKey {
  gan::GanKey key;
  std::size_t profiles = 0;
  gan::TrainResult result;
};

/// One GAN per (data_type, day_type, cluster) present in the prepared data.
/// Population and batch size are clamped to the profile count of small keys.
std::vector<TrainedKey> train_all(const PreparedData& data, const TrainOptions& options);

}  // namespace hedge::pipeline
