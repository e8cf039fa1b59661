#pragma once

#include <chrono>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hedge/types.hpp"

namespace hedge::ingest {

inline constexpr std::string_view kMeterHeader = "home_id,timestamp,kwh";
inline constexpr std::string_view kTripHeader =
    "home_id,start,duration_min,distance_miles,origin_home,destination_home,area_type";
inline constexpr std::string_view kValidityHeader = "home_id,valid_start,valid_end,valid_duration_min";

struct RawMeterReading {
  std::string home_id;
  Instant timestamp{};
  double value = 0.0;  // kWh over the native interval starting at `timestamp`
  DataType data_type = DataType::load;

  bool operator==(const RawMeterReading&) const = default;
};

enum class AreaType { urban, rural };
std::string_view to_string(AreaType area);

struct RawTripRecord {
  std::string home_id;
  Instant start{};
  double duration_min = 0.0;
  double distance_miles = 0.0;
  bool origin_home = false;
  bool destination_home = false;
  std::optional<AreaType> area_type;

  [[nodiscard]] Instant end() const;
  bool operator==(const RawTripRecord&) const = default;
};

struct ValidityRange {
  std::optional<Instant> start;
  std::optional<Instant> end;
  std::optional<std::chrono::seconds> duration;

  bool operator==(const ValidityRange&) const = default;
};

/// kWh-per-mile by trip class and feasibility caps. No defaults: values
/// come from configuration.
struct ConsumptionFactors {
  double urban = 0.0;
  double rural = 0.0;
  double motorway = 0.0;
  double motorway_threshold_miles = 10.0;
  double max_hourly_kwh = 0.0;
  double max_daily_kwh = 0.0;

  /// Throws InvalidArgument naming the first non-positive field.
  void validate() const;
  /// Motorway when distance exceeds the threshold, else the home's area.
  [[nodiscard]] double kwh_per_mile(double distance_miles, AreaType area) const;
};

// Parsing --------------------------------------------------------------------

struct MeterParseResult {
  std::vector<RawMeterReading> readings;  // sorted by (home_id, timestamp)
  std::size_t rows = 0;
  std::size_t skipped = 0;
};

struct TripParseResult {
  std::vector<RawTripRecord> trips;  // sorted by (home_id, start)
  std::size_t rows = 0;
  std::size_t skipped = 0;
};

/// Malformed rows are counted and skipped; a missing header, unreadable
/// stream, or a skipped fraction above `max_malformed_fraction` throws.
MeterParseResult parse_meter(std::istream& in, DataType data_type, double max_malformed_fraction = 0.05);
TripParseResult parse_trips(std::istream& in, double max_malformed_fraction = 0.05);
std::map<std::string, ValidityRange> parse_validity(std::istream& in);

// Validity -------------------------------------------------------------------

enum class ValidityStatus { confirmed, unconfirmed, inconsistent };

struct ResolvedValidity {
  ValidityStatus status = ValidityStatus::unconfirmed;
  Instant start{};
  Instant end{};
};

/// Infers the missing field when exactly one is absent.
ResolvedValidity resolve_validity(const ValidityRange& range);

struct ValidityOutcome {
  std::vector<RawMeterReading> readings;
  ValidityStatus status = ValidityStatus::unconfirmed;
};

/// Keeps readings with start <= timestamp <= end. A range with two or more
/// unknown fields, or an inconsistent triple, discards every reading.
ValidityOutcome enforce_validity(std::span<const RawMeterReading> readings, const ValidityRange& range);

// Trips ----------------------------------------------------------------------

struct TripFilterResult {
  std::vector<RawTripRecord> trips;
  std::size_t removed_unclassified = 0;  // trips of homes without an area type
  std::size_t removed_hourly = 0;        // trips over the pro-rated per-step cap
  std::size_t removed_daily = 0;         // trips on home-days over the daily cap
  std::size_t removed_days = 0;
  std::set<std::pair<std::string, Date>> dropped_days;  // home-days whose trips were removed by the daily cap
  std::set<std::string> unclassified_homes;
};

/// Per-step energy of every trip at `resolution_minutes` is checked against
/// max_hourly_kwh * resolution / 60; home-days above max_daily_kwh lose all
/// their trips.
TripFilterResult filter_trips(std::vector<RawTripRecord> trips, const ConsumptionFactors& factors,
                              int resolution_minutes);

struct EvDay {
  DayProfile profile;
  bool away_at_end = false;
  bool overlapping = false;  // the day holds overlapping trips and must be discarded
};

/// Converts the trips touching `date` into driving energy and at-home
/// availability. Trips crossing midnight contribute only their share inside
/// the day. `away_at_start` carries the previous day's away state.
EvDay trips_to_ev_day(std::span<const RawTripRecord> trips, const ConsumptionFactors& factors, int resolution_minutes,
                      Date date, AreaType area, bool away_at_start, const std::string& home_id);

struct EvDays {
  std::vector<DayProfile> days;
  std::size_t discarded_overlap = 0;
};

/// All days in [first, last] for one home, carrying away state across midnight.
EvDays ev_days_for_home(std::span<const RawTripRecord> trips, const ConsumptionFactors& factors, int resolution_minutes,
                        Date first, Date last);

// Resampling -----------------------------------------------------------------

/// Sums native-resolution readings of one home-day into target bins. A
/// target step is a gap only when no reading falls in its bin.
DayProfile resample_day(std::span<const RawMeterReading> readings, Date date, int native_minutes, int target_minutes);

/// Groups one home's readings by UTC date (readings must be time-sorted).
std::map<Date, std::span<const RawMeterReading>> split_days(std::span<const RawMeterReading> readings);

/// Smallest positive spacing between consecutive readings of any home, in minutes.
std::optional<int> infer_native_minutes(std::span<const RawMeterReading> readings);

// Segmenting -----------------------------------------------------------------

struct HomeRecords {
  std::string home_id;
  std::vector<RawMeterReading> load;
  std::vector<RawMeterReading> pv;
  std::vector<RawTripRecord> trips;
  std::optional<ValidityRange> validity;

  [[nodiscard]] std::size_t record_count() const { return load.size() + pv.size() + trips.size(); }
  bool operator==(const HomeRecords&) const = default;
};

struct RawCorpus {
  std::vector<HomeRecords> homes;  // ascending home_id
};

RawCorpus assemble_corpus(std::vector<RawMeterReading> load, std::vector<RawMeterReading> pv,
                          std::vector<RawTripRecord> trips, const std::map<std::string, ValidityRange>& validity);

/// Splits homes into `n_segments` groups without splitting any home; group
/// record counts differ by at most the largest single home.
std::vector<RawCorpus> segment_homes(const RawCorpus& corpus, int n_segments);

}  // namespace hedge::ingest
