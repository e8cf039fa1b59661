#include "hedge/prep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "hedge/random.hpp"
#include "hedge/stats.hpp"

namespace hedge::prep {

namespace {

constexpr int kLinearOffsets[] = {0};
constexpr int kAdjacentOffsets[] = {-1, 1};
constexpr int kOneOrTwoOffsets[] = {-1, 1, -2, 2};
constexpr int kDayOrWeekOffsets[] = {-1, 1, -7, 7};

double linear_fill(const std::vector<double>& v, std::size_t t) {
  const std::size_t n = v.size();
  if (n == 1) return 0.0;
  if (t == 0) return v[1];
  if (t == n - 1) return v[n - 2];
  return 0.5 * (v[t - 1] + v[t + 1]);
}

bool is_gap(const DayProfile& day, std::size_t t) {
  return std::binary_search(day.gaps.begin(), day.gaps.end(), t);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<std::vector<double>> kmeanspp_seed(std::span<const std::vector<double>> points, int k, Rng& rng) {
  std::vector<std::vector<double>> centroids;
  centroids.push_back(points[rng.below(points.size())]);
  std::vector<double> d2(points.size(), std::numeric_limits<double>::infinity());
  while (static_cast<int>(centroids.size()) < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
      total += d2[i];
    }
    if (total <= 0.0) {
      centroids.push_back(points[rng.below(points.size())]);
      continue;
    }
    centroids.push_back(points[rng.categorical(d2)]);
  }
  return centroids;
}

KMeansResult lloyd(std::span<const std::vector<double>> points, std::vector<std::vector<double>> centroids,
                   int max_iter) {
  const std::size_t k = centroids.size();
  const std::size_t dim = points.front().size();
  KMeansResult out;
  std::vector<int> labels(points.size(), -1);
  auto objective = [&] {
    double j = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      j += squared_distance(points[i], centroids[static_cast<std::size_t>(labels[i])]);
    }
    return j;
  };
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int c = nearest_centroid(centroids, points[i]);
      if (c != labels[i]) {
        labels[i] = c;
        changed = true;
      }
    }
    if (!changed) break;

    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      ++counts[c];
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += points[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < dim; ++j) centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
    // An empty cluster is re-seeded at the point farthest from its centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        const double d = squared_distance(points[i], centroids[static_cast<std::size_t>(labels[i])]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centroids[c] = points[far];
    }
    out.objective_trace.push_back(objective());
  }
  // Final assignment against the final centroids.
  for (std::size_t i = 0; i < points.size(); ++i) labels[i] = nearest_centroid(centroids, points[i]);
  out.inertia = objective();
  out.labels = std::move(labels);
  out.centroids = std::move(centroids);
  return out;
}

}  // namespace

// Gap filling -----------------------------------------------------------------

std::string_view to_string(FillMethod method) {
  switch (method) {
    case FillMethod::linear: return "linear";
    case FillMethod::adjacent_day: return "day_pm1";
    case FillMethod::one_or_two_days: return "day_pm1_or_2";
    case FillMethod::day_or_week: return "day_pm1_or_week";
  }
  return "?";
}

FillMethod parse_fill_method(std::string_view text) {
  for (auto m : kFillMethods) {
    if (to_string(m) == text) return m;
  }
  throw InvalidArgument("fill_method", "unknown method '" + std::string(text) + "'");
}

std::span<const int> donor_offsets(FillMethod method) {
  switch (method) {
    case FillMethod::linear: return {kLinearOffsets, 0};
    case FillMethod::adjacent_day: return kAdjacentOffsets;
    case FillMethod::one_or_two_days: return kOneOrTwoOffsets;
    case FillMethod::day_or_week: return kDayOrWeekOffsets;
  }
  return {};
}

std::optional<DayProfile> fill_gaps(const DayProfile& day, FillMethod method, const FillContext& context) {
  if (day.gaps.empty()) return day;
  for (std::size_t i = 1; i < day.gaps.size(); ++i) {
    if (day.gaps[i] == day.gaps[i - 1] + 1) return std::nullopt;
  }
  DayProfile out = day;
  const std::size_t n = day.values.size();
  for (std::size_t t : day.gaps) {
    double best_score = std::numeric_limits<double>::infinity();
    std::optional<double> donor;
    for (int offset : donor_offsets(method)) {
      const auto it = context.find(offset);
      if (it == context.end() || it->second == nullptr) continue;
      const DayProfile& cand = *it->second;
      if (cand.values.size() != n || is_gap(cand, t)) continue;
      double score = 0.0;
      bool usable = true;
      for (std::size_t f : {t - 1, t + 1}) {
        if (f >= n) continue;  // wraps below zero or past the end
        if (is_gap(cand, f)) {
          usable = false;
          break;
        }
        const double d = cand.values[f] - day.values[f];
        score += d * d;
      }
      if (usable && score < best_score) {
        best_score = score;
        donor = cand.values[t];
      }
    }
    out.values[t] = donor ? *donor : linear_fill(day.values, t);
  }
  out.gaps.clear();
  return out;
}

const FillError& FillComparisonReport::at(FillMethod method) const {
  for (const auto& m : methods) {
    if (m.method == method) return m;
  }
  throw std::out_of_range("method not in report");
}

FillMethod FillComparisonReport::best_mean() const {
  return std::min_element(methods.begin(), methods.end(),
                          [](const auto& a, const auto& b) { return a.mean_abs_error < b.mean_abs_error; })
      ->method;
}

FillComparisonReport compare_fill_methods(std::span<const DayProfile> days, double mask_fraction, std::uint64_t seed) {
  if (!(mask_fraction > 0.0 && mask_fraction <= 0.2)) {
    throw InvalidArgument("mask_fraction", "must lie in (0, 0.2]");
  }
  std::map<std::pair<std::string, Date>, const DayProfile*> index;
  for (const auto& d : days) {
    if (!d.gaps.empty()) throw InvalidArgument("days", "comparison days must be gap-free");
    index[{d.home_id, d.date}] = &d;
  }
  Rng rng(seed);
  std::array<std::vector<double>, kFillMethods.size()> errors;
  for (const auto& day : days) {
    const int n = day.steps();
    const int k = std::max(1, static_cast<int>(std::lround(mask_fraction * n)));
    DayProfile masked = day;
    for (int t : sample_non_adjacent(n, k, rng)) {
      masked.gaps.push_back(static_cast<std::size_t>(t));
      masked.values[static_cast<std::size_t>(t)] = 0.0;
    }
    FillContext context;
    for (int offset = -7; offset <= 7; ++offset) {
      if (offset == 0) continue;
      const auto it = index.find({day.home_id, day.date + std::chrono::days{offset}});
      if (it != index.end()) context[offset] = it->second;
    }
    for (std::size_t m = 0; m < kFillMethods.size(); ++m) {
      const auto filled = fill_gaps(masked, kFillMethods[m], context);
      for (std::size_t t : masked.gaps) errors[m].push_back(std::abs(filled->values[t] - day.values[t]));
    }
  }
  FillComparisonReport report;
  for (std::size_t m = 0; m < kFillMethods.size(); ++m) {
    FillError e;
    e.method = kFillMethods[m];
    e.points = errors[m].size();
    if (!errors[m].empty()) {
      e.mean_abs_error = stats::mean(errors[m]);
      e.p99_abs_error = stats::quantile(errors[m], 0.99);
    }
    report.methods.push_back(e);
  }
  return report;
}

// Normalisation ---------------------------------------------------------------

Normalised normalise(const DayProfile& day) {
  if (!day.gaps.empty()) throw InvalidArgument("gaps", "fill gaps before normalising");
  double total = 0.0;
  for (double v : day.values) {
    if (v < 0.0) throw InvalidArgument("values", "negative value in day profile");
    total += v;
  }
  Normalised out;
  out.profile.values.assign(day.values.size(), 0.0);
  if (total < kZeroDayThreshold) {
    out.profile.zero_day = true;
    return out;
  }
  for (std::size_t t = 0; t < day.values.size(); ++t) out.profile.values[t] = day.values[t] / total;
  out.factor.kwh = total;
  return out;
}

std::vector<double> rescale(const NormalisedProfile& profile, ScalingFactor factor) {
  std::vector<double> out(profile.values.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = factor.kwh * profile.values[t];
  return out;
}

// Features and clustering -----------------------------------------------------

std::string_view to_string(FeatureSpec spec) {
  switch (spec) {
    case FeatureSpec::load_features: return "load_features";
    case FeatureSpec::ev_features: return "ev_features";
    case FeatureSpec::month_group: return "month_group";
  }
  return "?";
}

FeatureSpec parse_feature_spec(std::string_view text) {
  for (auto s : {FeatureSpec::load_features, FeatureSpec::ev_features, FeatureSpec::month_group}) {
    if (to_string(s) == text) return s;
  }
  throw InvalidArgument("feature_spec", "unknown feature spec '" + std::string(text) + "'");
}

std::vector<double> extract_features(const NormalisedProfile& profile, FeatureSpec spec) {
  if (spec == FeatureSpec::month_group) {
    throw InvalidArgument("feature_spec", "month-grouped profiles are not clustered on features");
  }
  if (profile.zero_day) throw InvalidArgument("profile", "a zero day has no shape features");
  const auto& v = profile.values;
  const int n = static_cast<int>(v.size());
  if (n == 0) throw InvalidArgument("profile", "empty profile");
  const double step_minutes = 1440.0 / n;
  auto start_minute = [&](int t) { return t * step_minutes; };

  std::vector<double> features;
  if (spec == FeatureSpec::ev_features) {
    for (int t = 0; t < n; ++t) {
      if (start_minute(t) >= 6 * 60 && start_minute(t) < 22 * 60) features.push_back(v[static_cast<std::size_t>(t)]);
    }
    return features;
  }
  const auto peak = std::max_element(v.begin(), v.end());
  features.push_back(*peak);
  features.push_back(static_cast<double>(peak - v.begin()) / n);
  constexpr int windows[][2] = {{0, 7}, {7, 11}, {11, 14}, {14, 17}, {17, 21}, {21, 24}};
  for (const auto& w : windows) {
    double sum = 0.0;
    int count = 0;
    for (int t = 0; t < n; ++t) {
      if (start_minute(t) >= w[0] * 60 && start_minute(t) < w[1] * 60) {
        sum += v[static_cast<std::size_t>(t)];
        ++count;
      }
    }
    features.push_back(count > 0 ? sum / count : 0.0);
  }
  return features;
}

int nearest_centroid(std::span<const std::vector<double>> centroids, std::span<const double> point) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    if (centroids[c].size() != point.size()) throw InvalidArgument("centroids", "dimension mismatch");
    const double d = squared_distance(centroids[c], point);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

KMeansResult kmeans_fit(std::span<const std::vector<double>> points, const KMeansOptions& options) {
  if (options.k < 1) throw InvalidArgument("k", "must be at least 1");
  if (static_cast<std::size_t>(options.k) > points.size()) {
    throw InvalidArgument("k", "K = " + std::to_string(options.k) + " exceeds the " + std::to_string(points.size()) +
                                   " points");
  }
  const std::set<std::vector<double>> distinct(points.begin(), points.end());
  if (static_cast<std::size_t>(options.k) > distinct.size()) {
    throw InvalidArgument("k", "K exceeds the number of distinct points");
  }
  for (const auto& p : points) {
    if (p.size() != points.front().size()) throw InvalidArgument("features", "ragged feature vectors");
  }
  KMeansResult best;
  bool have = false;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
    auto result = lloyd(points, kmeanspp_seed(points, options.k, rng), std::max(1, options.max_iter));
    if (!have || result.inertia < best.inertia) {
      best = std::move(result);
      have = true;
    }
  }
  return best;
}

int assign_cluster(const ClusterModel& model, const NormalisedProfile& profile, Date date) {
  if (model.feature_spec == FeatureSpec::month_group) return static_cast<int>(month_of(date));
  if (profile.zero_day) {
    if (model.no_travel_cluster) return *model.no_travel_cluster;
    throw InvalidArgument("profile", "zero day cannot be assigned to a shape cluster");
  }
  return nearest_centroid(model.centroids, extract_features(profile, model.feature_spec));
}

}  // namespace hedge::prep
