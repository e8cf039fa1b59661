#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hedge/types.hpp"

namespace hedge::prep {

// Gap filling -----------------------------------------------------------------

enum class FillMethod {
  linear,            // midpoint of the neighbouring steps
  adjacent_day,      // same step on the day before or after
  one_or_two_days,   // same step one or two days before or after
  day_or_week,       // same step one day or one week before or after
};

inline constexpr std::array<FillMethod, 4> kFillMethods{FillMethod::linear, FillMethod::adjacent_day,
                                                        FillMethod::one_or_two_days, FillMethod::day_or_week};

std::string_view to_string(FillMethod method);
FillMethod parse_fill_method(std::string_view text);

/// Donor day offsets in the order they are tried.
std::span<const int> donor_offsets(FillMethod method);

/// Other days of the same home keyed by day offset from the day being filled.
using FillContext = std::map<int, const DayProfile*>;

/// Fills isolated gaps; returns nullopt when the day has two or more
/// consecutive gaps. Donor methods pick, among the available candidate days,
/// the one minimising the squared differences at the steps flanking the gap;
/// if no candidate has the step, the gap is filled linearly.
std::optional<DayProfile> fill_gaps(const DayProfile& day, FillMethod method, const FillContext& context = {});

struct FillError {
  FillMethod method = FillMethod::linear;
  double mean_abs_error = 0.0;
  double p99_abs_error = 0.0;
  std::size_t points = 0;
};

struct FillComparisonReport {
  std::vector<FillError> methods;  // in kFillMethods order

  [[nodiscard]] const FillError& at(FillMethod method) const;
  [[nodiscard]] FillMethod best_mean() const;
};

/// Masks a fraction of isolated points on gap-free days, fills them with each
/// method, and reports absolute errors against the held-out values. `days`
/// supplies both the test days and their donor context (matched by home and
/// date).
FillComparisonReport compare_fill_methods(std::span<const DayProfile> days, double mask_fraction, std::uint64_t seed);

// Normalisation ---------------------------------------------------------------

struct NormalisedProfile {
  std::vector<double> values;
  bool zero_day = false;
};

struct ScalingFactor {
  double kwh = 0.0;
};

struct Normalised {
  NormalisedProfile profile;
  ScalingFactor factor;
};

inline constexpr double kZeroDayThreshold = 1e-9;

/// Unit-sum shape plus the daily total that rescales it.
Normalised normalise(const DayProfile& day);
std::vector<double> rescale(const NormalisedProfile& profile, ScalingFactor factor);

// Features and clustering -----------------------------------------------------

enum class FeatureSpec { load_features, ev_features, month_group };

std::string_view to_string(FeatureSpec spec);
FeatureSpec parse_feature_spec(std::string_view text);

/// Load: [peak, peak step / T, window means 0-7h, 7-11h, 11-14h, 14-17h,
/// 17-21h, 21-24h]. EV: the normalised values of steps starting in 06:00-22:00.
std::vector<double> extract_features(const NormalisedProfile& profile, FeatureSpec spec);

struct ClusterModel {
  DataType data_type = DataType::load;
  DayType day_type = DayType::weekday;
  int k = 1;  // K-means clusters (12 month groups for PV)
  FeatureSpec feature_spec = FeatureSpec::load_features;
  std::vector<std::vector<double>> centroids;
  std::optional<int> no_travel_cluster;

  /// Number of cluster indices a label can take (K plus the no-travel group).
  [[nodiscard]] int cluster_count() const { return k + (no_travel_cluster ? 1 : 0); }
  bool operator==(const ClusterModel&) const = default;
};

struct KMeansOptions {
  int k = 4;
  std::uint64_t seed = 0;
  int max_iter = 100;
  int restarts = 10;
};

struct KMeansResult {
  std::vector<std::vector<double>> centroids;
  std::vector<int> labels;
  double inertia = 0.0;
  std::vector<double> objective_trace;  // within-cluster sum of squares per Lloyd iteration (best restart)
};

/// Lloyd's algorithm with k-means++ seeding and restarts; keeps the restart
/// with the lowest within-cluster sum of squares.
KMeansResult kmeans_fit(std::span<const std::vector<double>> points, const KMeansOptions& options);

/// Index of the nearest centroid; ties go to the lowest index.
int nearest_centroid(std::span<const std::vector<double>> centroids, std::span<const double> point);

/// EV zero days map to the no-travel cluster, month-grouped models map to the
/// calendar month (1-12), everything else to the nearest centroid.
int assign_cluster(const ClusterModel& model, const NormalisedProfile& profile, Date date);

}  // namespace hedge::prep
