#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hedge/types.hpp"

namespace hedge::corpus {

/// Ground-truth template for metered data (load or PV).
struct ShapeArchetype {
  std::string id;
  std::vector<double> shape;      // nonnegative, one value per native step
  double weight = 1.0;            // relative share of homes
  double autocorrelation = 0.8;   // AR(1) coefficient of the log day factor
  double noise_scale = 0.1;       // sd of the per-step multiplicative log-normal noise
  double mean_log_factor = 2.0;   // log kWh/day
  double log_factor_sd = 0.3;     // stationary sd of the AR(1) log factor
  double seasonal_amplitude = 0.0;  // log-factor swing over the year, peak at day 172
};

/// Ground-truth template for travel diaries: an out-and-back trip from home.
struct TripArchetype {
  std::string id;
  double weight = 1.0;
  int depart_minute = 8 * 60;
  int away_minutes = 9 * 60;
  int jitter_minutes = 30;
  double speed_mph = 30.0;
  double no_travel_probability = 0.1;
  double autocorrelation = 0.7;
  double mean_log_miles = 2.5;  // log of total daily miles
  double log_miles_sd = 0.3;
};

struct DefectRates {
  double single_missing = 0.0;    // per-point probability of an isolated missing reading
  double multi_gap_days = 0.0;    // fraction of home-days given a run of >= 2 missing readings
  double invalid_range_homes = 0.0;  // fraction of homes whose validity range cannot be confirmed
};

struct CorpusSpec {
  int n_homes = 10;
  int n_days = 14;
  int resolution_minutes = 60;
  Date start_date = Date{std::chrono::year{2013} / 1 / 1};
  std::vector<ShapeArchetype> load;
  std::vector<ShapeArchetype> pv;
  std::vector<TripArchetype> ev;
  DefectRates defects;
  double rural_fraction = 0.3;
  std::uint64_t seed = 1;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
};

/// Smooth template of `steps` points built from Gaussian bumps on a base level.
struct Bump {
  double center_hour;
  double width_hours;
  double height;
};
std::vector<double> render_shape(int steps, double base, const std::vector<Bump>& bumps);

/// Four well-separated household load archetypes (night, morning, daytime, evening).
std::vector<ShapeArchetype> reference_load_archetypes(int resolution_minutes);
std::vector<ShapeArchetype> reference_pv_archetypes(int resolution_minutes);
/// Commuter, short local trips, long motorway commute.
std::vector<TripArchetype> reference_ev_archetypes();

/// Reference corpus spec with all archetype families populated.
CorpusSpec reference_spec(int n_homes, int n_days, int resolution_minutes, std::uint64_t seed);

/// Ground truth for one (home, date, data type).
struct LabelRecord {
  std::string home_id;
  Date date{};
  DataType data_type = DataType::load;
  std::string archetype_id;
  int archetype_index = 0;
  double factor = 0.0;                   // kWh/day (load, pv) or total miles (ev)
  std::vector<int> defect_positions;     // native step indices with no emitted reading
  bool no_travel = false;                // ev only
};

struct HomeLabel {
  std::string home_id;
  std::string area_type;
  bool invalid_range = false;
};

/// The corpus as CSV text plus its JSON label sidecar.
struct RawCorpusFiles {
  std::string load_csv;
  std::string pv_csv;
  std::string trips_csv;
  std::string validity_csv;
  std::string labels_json;
  std::vector<LabelRecord> labels;
  std::vector<HomeLabel> homes;
  std::size_t load_records = 0;
  std::size_t pv_records = 0;
  std::size_t trip_records = 0;
};

/// Pure function of `spec`: equal specs give byte-identical files.
RawCorpusFiles synth_corpus(const CorpusSpec& spec);

}  // namespace hedge::corpus
