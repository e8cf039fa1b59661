#include "hedge/pipeline.hpp"

#include <algorithm>
#include <future>
#include <set>

namespace hedge::pipeline {

namespace {

void add(PrepareCounters& into, const PrepareCounters& c) {
  into.homes_in += c.homes_in;
  into.homes_unconfirmed += c.homes_unconfirmed;
  into.homes_inconsistent += c.homes_inconsistent;
  into.homes_without_validity += c.homes_without_validity;
  into.readings_outside_validity += c.readings_outside_validity;
  into.days_resampled += c.days_resampled;
  into.days_filled += c.days_filled;
  into.days_discarded_gaps += c.days_discarded_gaps;
  into.ev_days += c.ev_days;
  into.ev_days_discarded_overlap += c.ev_days_discarded_overlap;
  into.trips_removed_unclassified += c.trips_removed_unclassified;
  into.trips_removed_hourly += c.trips_removed_hourly;
  into.trips_removed_daily += c.trips_removed_daily;
}

std::vector<DayProfile> meter_days(std::span<const ingest::RawMeterReading> readings, const PrepareConfig& cfg,
                                   PrepareCounters& counters) {
  std::vector<DayProfile> out;
  if (readings.empty()) return out;
  const int native = ingest::infer_native_minutes(readings).value_or(cfg.resolution_minutes);
  std::vector<DayProfile> raw;
  for (const auto& [date, day] : ingest::split_days(readings)) {
    raw.push_back(ingest::resample_day(day, date, native, cfg.resolution_minutes));
    ++counters.days_resampled;
  }
  std::map<Date, const DayProfile*> by_date;
  for (const auto& d : raw) by_date[d.date] = &d;
  for (const auto& d : raw) {
    if (d.gaps.empty()) {
      out.push_back(d);
      continue;
    }
    prep::FillContext context;
    for (int offset : prep::donor_offsets(cfg.fill_method)) {
      if (const auto it = by_date.find(d.date + std::chrono::days{offset}); it != by_date.end()) {
        context[offset] = it->second;
      }
    }
    if (auto filled = prep::fill_gaps(d, cfg.fill_method, context)) {
      ++counters.days_filled;
      out.push_back(std::move(*filled));
    } else {
      ++counters.days_discarded_gaps;
    }
  }
  return out;
}

prep::FeatureSpec feature_spec_for(DataType type) {
  switch (type) {
    case DataType::load: return prep::FeatureSpec::load_features;
    case DataType::ev: return prep::FeatureSpec::ev_features;
    case DataType::pv: return prep::FeatureSpec::month_group;
  }
  return prep::FeatureSpec::load_features;
}

}  // namespace

void PrepareConfig::validate() const {
  steps_per_day(resolution_minutes);
  if (n_segments < 1) throw InvalidArgument("n_segments", "must be at least 1");
  factors.validate();
  if (load_clusters < 1) throw InvalidArgument("clusters.load", "must be at least 1");
  if (ev_clusters < 1) throw InvalidArgument("clusters.ev", "must be at least 1");
  if (factor_bins < 1) throw InvalidArgument("m", "must be at least 1");
  if (kmeans_restarts < 1) throw InvalidArgument("kmeans_restarts", "must be at least 1");
  if (kmeans_max_iter < 1) throw InvalidArgument("kmeans_max_iter", "must be at least 1");
  if (!(fill_mask_fraction > 0.0 && fill_mask_fraction <= 0.2)) {
    throw InvalidArgument("fill_mask_fraction", "must lie in (0, 0.2]");
  }
}

HomeDays process_home(const ingest::HomeRecords& home, const PrepareConfig& cfg) {
  HomeDays out;
  auto& c = out.counters;
  c.homes_in = 1;

  std::span<const ingest::RawMeterReading> load = home.load;
  std::span<const ingest::RawMeterReading> pv = home.pv;
  std::vector<ingest::RawMeterReading> load_kept;
  std::vector<ingest::RawMeterReading> pv_kept;
  std::optional<ingest::ResolvedValidity> window;
  if (cfg.validity_supplied) {
    if (!home.validity) {
      ++c.homes_without_validity;
      return out;
    }
    const auto resolved = ingest::resolve_validity(*home.validity);
    if (resolved.status == ingest::ValidityStatus::unconfirmed) {
      ++c.homes_unconfirmed;
      return out;
    }
    if (resolved.status == ingest::ValidityStatus::inconsistent) {
      ++c.homes_inconsistent;
      return out;
    }
    window = resolved;
    load_kept = ingest::enforce_validity(home.load, *home.validity).readings;
    pv_kept = ingest::enforce_validity(home.pv, *home.validity).readings;
    c.readings_outside_validity += home.load.size() - load_kept.size() + home.pv.size() - pv_kept.size();
    load = load_kept;
    pv = pv_kept;
  }

  out.load = meter_days(load, cfg, c);
  out.pv = meter_days(pv, cfg, c);

  auto filtered = ingest::filter_trips(home.trips, cfg.factors, cfg.resolution_minutes);
  c.trips_removed_unclassified += filtered.removed_unclassified;
  c.trips_removed_hourly += filtered.removed_hourly;
  c.trips_removed_daily += filtered.removed_daily;
  if (!filtered.unclassified_homes.empty()) return out;

  std::optional<std::pair<Date, Date>> range;
  if (window) {
    range = {std::chrono::floor<std::chrono::days>(window->start), std::chrono::floor<std::chrono::days>(window->end)};
  } else if (!home.trips.empty()) {
    Instant last = home.trips.front().end();
    for (const auto& t : home.trips) last = std::max(last, t.end());
    range = {std::chrono::floor<std::chrono::days>(home.trips.front().start), std::chrono::floor<std::chrono::days>(last)};
  }
  if (range) {
    auto ev = ingest::ev_days_for_home(filtered.trips, cfg.factors, cfg.resolution_minutes, range->first, range->second);
    c.ev_days_discarded_overlap += ev.discarded_overlap;
    for (auto& d : ev.days) {
      if (filtered.dropped_days.contains({home.home_id, d.date})) continue;
      d.home_id = home.home_id;
      out.ev.push_back(std::move(d));
    }
    c.ev_days += out.ev.size();
  }
  return out;
}

prep::ClusterModel fit_cluster_model(DataType type, DayType day, const std::vector<prep::NormalisedProfile>& profiles,
                                     const PrepareConfig& cfg) {
  prep::ClusterModel model;
  model.data_type = type;
  model.day_type = day;
  model.feature_spec = feature_spec_for(type);
  if (type == DataType::pv) {
    model.k = 12;
    return model;
  }
  std::vector<std::vector<double>> features;
  for (const auto& p : profiles) {
    if (!p.zero_day) features.push_back(prep::extract_features(p, model.feature_spec));
  }
  const int k = type == DataType::load ? cfg.load_clusters : cfg.ev_clusters;
  if (features.size() < static_cast<std::size_t>(k)) {
    throw DataError(std::string(to_string(type)) + "/" + std::string(to_string(day)) + ": " +
                    std::to_string(features.size()) + " non-zero profiles cannot support " + std::to_string(k) +
                    " clusters");
  }
  prep::KMeansOptions opts;
  opts.k = k;
  opts.seed = derive_seed(cfg.seed, std::string("kmeans/") + std::string(to_string(type)) + "/" +
                                        std::string(to_string(day)));
  opts.max_iter = cfg.kmeans_max_iter;
  opts.restarts = cfg.kmeans_restarts;
  auto fit = prep::kmeans_fit(features, opts);
  model.k = k;
  model.centroids = std::move(fit.centroids);
  if (type == DataType::ev) model.no_travel_cluster = k;
  return model;
}

PreparedData prepare(const ingest::RawCorpus& corpus, const PrepareConfig& cfg) {
  cfg.validate();
  PreparedData data;
  data.steps = steps_per_day(cfg.resolution_minutes);

  // Segments run concurrently; results are merged in segment order.
  const auto segments = ingest::segment_homes(corpus, cfg.n_segments);
  std::vector<std::future<std::vector<HomeDays>>> futures;
  for (const auto& segment : segments) {
    futures.push_back(std::async(std::launch::async, [&segment, &cfg] {
      std::vector<HomeDays> homes;
      for (const auto& h : segment.homes) homes.push_back(process_home(h, cfg));
      return homes;
    }));
  }
  std::map<DataType, std::vector<DayProfile>> by_type;
  for (auto& f : futures) {
    for (auto& h : f.get()) {
      add(data.counters, h.counters);
      for (auto* list : {&h.load, &h.pv, &h.ev}) {
        for (auto& d : *list) by_type[d.data_type].push_back(std::move(d));
      }
    }
  }
  for (auto& [type, days] : by_type) {
    std::sort(days.begin(), days.end(), [](const DayProfile& a, const DayProfile& b) {
      return a.home_id != b.home_id ? a.home_id < b.home_id : a.date < b.date;
    });
  }

  // Fill-method comparison on the gap-free load days.
  if (const auto it = by_type.find(DataType::load); it != by_type.end() && !it->second.empty()) {
    std::vector<DayProfile> complete;
    for (const auto& d : it->second) {
      if (d.gaps.empty()) complete.push_back(d);
    }
    if (!complete.empty()) {
      data.fill_report = prep::compare_fill_methods(complete, cfg.fill_mask_fraction, derive_seed(cfg.seed, "fill"));
    }
  }

  for (DataType type : kDataTypes) {
    const auto it = by_type.find(type);
    if (it == by_type.end() || it->second.empty()) continue;
    const auto& days = it->second;

    std::vector<PreparedDay> prepared;
    prepared.reserve(days.size());
    std::map<DayType, std::vector<prep::NormalisedProfile>> per_day_type;
    for (const auto& d : days) {
      auto n = prep::normalise(d);
      per_day_type[d.day_type].push_back(n.profile);
      prepared.push_back({d.home_id, d.date, type, std::move(n.profile), n.factor.kwh, 0});
    }

    engine::DataTypeArtifacts art;
    art.data_type = type;
    art.steps = data.steps;
    for (DayType day : kDayTypes) {
      art.cluster_models[day] = fit_cluster_model(type, day, per_day_type[day], cfg);
    }
    for (auto& p : prepared) p.cluster = prep::assign_cluster(art.cluster_models.at(p.day_type()), p.profile, p.date);

    // Factor bins over every day carrying a factor (EV no-travel days excluded).
    std::vector<double> factors;
    std::vector<transitions::DayObservation> observations;
    for (const auto& p : prepared) {
      const bool has_factor = !(type == DataType::ev && p.profile.zero_day);
      if (has_factor) factors.push_back(p.factor);
      observations.push_back({p.home_id, p.date, p.cluster, p.factor, has_factor});
    }
    if (factors.empty()) throw DataError(std::string(to_string(type)) + ": no days with a scaling factor");
    auto bins = transitions::percentile_bins(factors, cfg.factor_bins);
    data.counters.bins_collapsed[type] = bins.collapsed;
    art.factor_marginal.assign(static_cast<std::size_t>(bins.m()), 0.0);
    for (double f : factors) art.factor_marginal[static_cast<std::size_t>(bins.bin_of(f))] += 1.0;
    for (double& v : art.factor_marginal) v /= static_cast<double>(factors.size());

    const auto pairs = transitions::collect_pairs(std::move(observations));
    for (const auto& key : kDayTransitions) {
      const auto fp = pairs.factors.find(key);
      const std::span<const std::pair<double, double>> fpairs =
          fp == pairs.factors.end() ? std::span<const std::pair<double, double>>{} : fp->second;
      art.factor_matrices[key] = transitions::build_factor_matrix(type, key, bins, fpairs);
      if (type == DataType::pv) continue;
      const auto cp = pairs.clusters.find(key);
      const std::span<const std::pair<int, int>> cpairs =
          cp == pairs.clusters.end() ? std::span<const std::pair<int, int>>{} : cp->second;
      std::vector<int> from_labels;
      for (const auto& p : prepared) {
        if (p.day_type() == key.from) from_labels.push_back(p.cluster);
      }
      const int k = art.cluster_models.at(key.from).cluster_count();
      art.cluster_matrices[key] = transitions::build_cluster_matrix(type, key, k, cpairs, from_labels);
    }
    data.artifacts[type] = std::move(art);
    data.days.insert(data.days.end(), std::make_move_iterator(prepared.begin()),
                     std::make_move_iterator(prepared.end()));
  }
  return data;
}

std::vector<std::vector<double>> training_profiles(const PreparedData& data, const gan::GanKey& key) {
  std::vector<std::vector<double>> out;
  for (const auto& d : data.days) {
    if (d.data_type == key.data_type && d.day_type() == key.day_type && d.cluster == key.cluster &&
        !d.profile.zero_day) {
      out.push_back(d.profile.values);
    }
  }
  return out;
}

std::vector<TrainedKey> train_all(const PreparedData& data, const TrainOptions& options) {
  std::set<gan::GanKey> keys;
  for (const auto& d : data.days) {
    if (!d.profile.zero_day) keys.insert({d.data_type, d.day_type(), d.cluster});
  }
  std::vector<TrainedKey> out;
  for (const auto& key : keys) {
    auto profiles = training_profiles(data, key);
    if (profiles.size() < static_cast<std::size_t>(std::max(2, options.min_profiles))) continue;
    const std::uint64_t key_seed =
        derive_seed(options.gan.seed, "gan/" + gan::to_string(key));
    if (options.max_profiles_per_cluster > 0 &&
        profiles.size() > static_cast<std::size_t>(options.max_profiles_per_cluster)) {
      Rng pick(derive_seed(key_seed, "subsample"));
      pick.shuffle(profiles.begin(), profiles.end());
      profiles.resize(static_cast<std::size_t>(options.max_profiles_per_cluster));
    }
    gan::TrainConfig cfg = options.gan;
    cfg.seed = key_seed;
    cfg.population = std::min<int>(cfg.population, static_cast<int>(profiles.size()));
    cfg.batch_size = std::min<int>(cfg.batch_size, static_cast<int>(profiles.size()));
    TrainedKey trained{key, profiles.size(), gan::train_gan(profiles, cfg, key)};
    out.push_back(std::move(trained));
  }
  return out;
}

}  // namespace hedge::pipeline
