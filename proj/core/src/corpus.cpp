#include "hedge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hedge/ingest.hpp"
#include "hedge/random.hpp"

namespace hedge::corpus {

namespace {

using nlohmann::json;

void check_rate(const char* field, double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw InvalidArgument(field, "must lie in [0, 1]");
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string home_name(int index, int n_homes) {
  const auto width = std::max<std::size_t>(4, std::to_string(n_homes).size());
  std::string digits = std::to_string(index);
  return "h" + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}

/// AR(1) in log space with stationary sd `sd`.
class LogFactorProcess {
 public:
  LogFactorProcess(double phi, double sd, Rng& rng) : phi_(phi), sd_(sd), state_(rng.normal(0.0, sd)) {}
  double next(Rng& rng) {
    const double value = state_;
    state_ = phi_ * state_ + std::sqrt(1.0 - phi_ * phi_) * sd_ * rng.normal();
    return value;
  }

 private:
  double phi_;
  double sd_;
  double state_;
};

double seasonal_offset(Date date, double amplitude) {
  if (amplitude == 0.0) return 0.0;
  const auto ymd = std::chrono::year_month_day{date};
  const Date jan1{ymd.year() / 1 / 1};
  const double doy = static_cast<double>((date - jan1).count());
  return amplitude * std::cos(2.0 * std::numbers::pi * (doy - 172.0) / 365.25);
}

std::size_t pick_archetype(std::span<const double> weights, Rng& rng) { return rng.categorical(weights); }

template <typename A>
std::vector<double> weights_of(const std::vector<A>& archetypes) {
  std::vector<double> w;
  for (const auto& a : archetypes) w.push_back(a.weight);
  return w;
}

struct MeterEmitter {
  std::string csv;
  std::size_t records = 0;
};

void emit_meter_home(const CorpusSpec& spec, DataType type, const std::vector<ShapeArchetype>& family,
                     const std::string& home_id, std::uint64_t seed, MeterEmitter& out,
                     std::vector<LabelRecord>& labels) {
  if (family.empty()) return;
  Rng rng(seed);
  const int steps = 1440 / spec.resolution_minutes;
  const auto weights = weights_of(family);
  const auto index = pick_archetype(weights, rng);
  const auto& arch = family[index];
  LogFactorProcess process(arch.autocorrelation, arch.log_factor_sd, rng);
  std::vector<double> x(static_cast<std::size_t>(steps));
  for (int d = 0; d < spec.n_days; ++d) {
    const Date date = spec.start_date + std::chrono::days{d};
    const double factor = std::exp(arch.mean_log_factor + seasonal_offset(date, arch.seasonal_amplitude) + process.next(rng));
    const double sigma = arch.noise_scale;
    double total = 0.0;
    for (int t = 0; t < steps; ++t) {
      const auto i = static_cast<std::size_t>(t);
      x[i] = arch.shape[i] * std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
      total += x[i];
    }

    int singles = 0;
    for (int t = 0; t < steps; ++t) singles += rng.bernoulli(spec.defects.single_missing) ? 1 : 0;
    std::vector<int> missing = sample_non_adjacent(steps, singles, rng);
    if (rng.bernoulli(spec.defects.multi_gap_days) && steps >= 2) {
      const int len = std::min(steps, 2 + static_cast<int>(rng.below(3)));
      const int start = static_cast<int>(rng.below(static_cast<std::uint64_t>(steps - len + 1)));
      for (int t = start; t < start + len; ++t) missing.push_back(t);
      std::sort(missing.begin(), missing.end());
      missing.erase(std::unique(missing.begin(), missing.end()), missing.end());
    }

    std::size_t next_missing = 0;
    for (int t = 0; t < steps; ++t) {
      if (next_missing < missing.size() && missing[next_missing] == t) {
        ++next_missing;
        continue;
      }
      const double value = total > 0.0 ? factor * x[static_cast<std::size_t>(t)] / total : 0.0;
      const Instant ts = Instant{date} + std::chrono::minutes{t * spec.resolution_minutes};
      out.csv += home_id;
      out.csv += ',';
      out.csv += format_instant(ts);
      out.csv += ',';
      out.csv += fmt_double(value);
      out.csv += '\n';
      ++out.records;
    }
    labels.push_back({home_id, date, type, arch.id, static_cast<int>(index), total > 0.0 ? factor : 0.0,
                      std::move(missing), false});
  }
}

void emit_trip(std::string& csv, const std::string& home_id, Instant start, int duration, double miles, bool origin_home,
               bool destination_home, ingest::AreaType area) {
  csv += home_id;
  csv += ',';
  csv += format_instant(start);
  csv += ',';
  csv += std::to_string(duration);
  csv += ',';
  csv += fmt_double(miles);
  csv += origin_home ? ",1" : ",0";
  csv += destination_home ? ",1," : ",0,";
  csv += ingest::to_string(area);
  csv += '\n';
}

void emit_trips_home(const CorpusSpec& spec, const std::string& home_id, ingest::AreaType area, std::uint64_t seed,
                     std::string& csv, std::size_t& records, std::vector<LabelRecord>& labels) {
  if (spec.ev.empty()) return;
  Rng rng(seed);
  const auto weights = weights_of(spec.ev);
  const auto index = pick_archetype(weights, rng);
  const auto& arch = spec.ev[index];
  LogFactorProcess process(arch.autocorrelation, arch.log_miles_sd, rng);
  for (int d = 0; d < spec.n_days; ++d) {
    const Date date = spec.start_date + std::chrono::days{d};
    const double miles = std::exp(arch.mean_log_miles + process.next(rng));
    const bool no_travel = rng.bernoulli(arch.no_travel_probability);
    const double jitter = static_cast<double>(arch.jitter_minutes);
    const int depart = std::max(0, arch.depart_minute + static_cast<int>(std::lround(rng.uniform(-jitter, jitter))));
    const int away = std::max(1, arch.away_minutes + static_cast<int>(std::lround(rng.uniform(-jitter, jitter))));
    if (no_travel) {
      labels.push_back({home_id, date, DataType::ev, arch.id, static_cast<int>(index), 0.0, {}, true});
      continue;
    }
    const double leg = miles / 2.0;
    const int duration = std::max(1, static_cast<int>(std::lround(leg / arch.speed_mph * 60.0)));
    const int back = std::max(depart + duration + 1, depart + away);
    emit_trip(csv, home_id, Instant{date} + std::chrono::minutes{depart}, duration, leg, true, false, area);
    emit_trip(csv, home_id, Instant{date} + std::chrono::minutes{back}, duration, leg, false, true, area);
    records += 2;
    labels.push_back({home_id, date, DataType::ev, arch.id, static_cast<int>(index), 2.0 * leg, {}, false});
  }
}

json archetype_ids(const auto& family) {
  json ids = json::array();
  for (const auto& a : family) ids.push_back(a.id);
  return ids;
}

}  // namespace

void CorpusSpec::validate() const {
  if (n_homes < 1) throw InvalidArgument("n_homes", "must be at least 1");
  if (n_days < 1) throw InvalidArgument("n_days", "must be at least 1");
  const int steps = steps_per_day(resolution_minutes);
  check_rate("defect_rates.single_missing", defects.single_missing);
  check_rate("defect_rates.multi_gap_days", defects.multi_gap_days);
  check_rate("defect_rates.invalid_range_homes", defects.invalid_range_homes);
  check_rate("rural_fraction", rural_fraction);
  for (const auto* family : {&load, &pv}) {
    for (const auto& a : *family) {
      if (a.shape.size() != static_cast<std::size_t>(steps)) {
        throw InvalidArgument("archetypes." + a.id + ".shape", "length must equal steps per day");
      }
      if (std::any_of(a.shape.begin(), a.shape.end(), [](double v) { return !(v >= 0.0); })) {
        throw InvalidArgument("archetypes." + a.id + ".shape", "must be nonnegative");
      }
      if (!(a.weight >= 0.0)) throw InvalidArgument("archetypes." + a.id + ".weight", "must be nonnegative");
      if (!(std::abs(a.autocorrelation) < 1.0)) {
        throw InvalidArgument("archetypes." + a.id + ".autocorrelation", "must lie in (-1, 1)");
      }
      if (!(a.noise_scale >= 0.0)) throw InvalidArgument("archetypes." + a.id + ".noise_scale", "must be nonnegative");
    }
  }
  for (const auto& a : ev) {
    if (!(a.weight >= 0.0)) throw InvalidArgument("archetypes." + a.id + ".weight", "must be nonnegative");
    if (!(std::abs(a.autocorrelation) < 1.0)) {
      throw InvalidArgument("archetypes." + a.id + ".autocorrelation", "must lie in (-1, 1)");
    }
    if (!(a.speed_mph > 0.0)) throw InvalidArgument("archetypes." + a.id + ".speed_mph", "must be positive");
    check_rate("archetypes.no_travel_probability", a.no_travel_probability);
  }
}

std::vector<double> render_shape(int steps, double base, const std::vector<Bump>& bumps) {
  std::vector<double> shape(static_cast<std::size_t>(steps), base);
  for (int t = 0; t < steps; ++t) {
    const double hour = (t + 0.5) * 24.0 / steps;
    for (const auto& b : bumps) {
      const double z = (hour - b.center_hour) / b.width_hours;
      shape[static_cast<std::size_t>(t)] += b.height * std::exp(-0.5 * z * z);
    }
  }
  return shape;
}

std::vector<ShapeArchetype> reference_load_archetypes(int resolution_minutes) {
  const int steps = steps_per_day(resolution_minutes);
  auto make = [&](std::string id, std::vector<Bump> bumps) {
    ShapeArchetype a;
    a.id = std::move(id);
    a.shape = render_shape(steps, 0.3, bumps);
    a.noise_scale = 0.15;
    a.autocorrelation = 0.8;
    a.mean_log_factor = std::log(10.0);
    a.log_factor_sd = 0.3;
    return a;
  };
  return {
      make("load_night", {{2.5, 1.5, 2.5}, {20.0, 2.0, 0.4}}),
      make("load_morning", {{7.5, 1.0, 2.5}, {19.0, 2.0, 0.5}}),
      make("load_daytime", {{13.0, 2.5, 1.6}}),
      make("load_evening", {{19.0, 1.3, 2.6}}),
  };
}

std::vector<ShapeArchetype> reference_pv_archetypes(int resolution_minutes) {
  const int steps = steps_per_day(resolution_minutes);
  auto make = [&](std::string id, double center, double width, double mean_log) {
    ShapeArchetype a;
    a.id = std::move(id);
    a.shape = render_shape(steps, 0.0, {{center, width, 1.0}});
    for (int t = 0; t < steps; ++t) {
      const double hour = (t + 0.5) * 24.0 / steps;
      if (hour < 5.0 || hour > 20.0) a.shape[static_cast<std::size_t>(t)] = 0.0;
    }
    a.noise_scale = 0.2;
    a.autocorrelation = 0.6;
    a.mean_log_factor = mean_log;
    a.log_factor_sd = 0.5;
    a.seasonal_amplitude = 0.8;
    return a;
  };
  return {make("pv_south", 12.5, 2.3, std::log(5.0)), make("pv_west", 14.0, 2.3, std::log(4.0))};
}

std::vector<TripArchetype> reference_ev_archetypes() {
  TripArchetype commuter;
  commuter.id = "ev_commuter";
  commuter.depart_minute = 8 * 60;
  commuter.away_minutes = 9 * 60;
  commuter.mean_log_miles = std::log(14.0);
  commuter.no_travel_probability = 0.15;

  TripArchetype local;
  local.id = "ev_local";
  local.depart_minute = 10 * 60 + 30;
  local.away_minutes = 120;
  local.speed_mph = 20.0;
  local.mean_log_miles = std::log(6.0);
  local.no_travel_probability = 0.3;

  TripArchetype motorway;
  motorway.id = "ev_long";
  motorway.depart_minute = 6 * 60;
  motorway.away_minutes = 13 * 60;
  motorway.speed_mph = 45.0;
  motorway.mean_log_miles = std::log(34.0);
  motorway.log_miles_sd = 0.2;
  motorway.no_travel_probability = 0.1;
  return {commuter, local, motorway};
}

CorpusSpec reference_spec(int n_homes, int n_days, int resolution_minutes, std::uint64_t seed) {
  CorpusSpec spec;
  spec.n_homes = n_homes;
  spec.n_days = n_days;
  spec.resolution_minutes = resolution_minutes;
  spec.load = reference_load_archetypes(resolution_minutes);
  spec.pv = reference_pv_archetypes(resolution_minutes);
  spec.ev = reference_ev_archetypes();
  spec.seed = seed;
  return spec;
}

RawCorpusFiles synth_corpus(const CorpusSpec& spec) {
  spec.validate();
  RawCorpusFiles out;
  out.load_csv = std::string(ingest::kMeterHeader) + "\n";
  out.pv_csv = out.load_csv;
  out.trips_csv = std::string(ingest::kTripHeader) + "\n";
  out.validity_csv = std::string(ingest::kValidityHeader) + "\n";

  MeterEmitter load_out{std::move(out.load_csv), 0};
  MeterEmitter pv_out{std::move(out.pv_csv), 0};
  const int span_minutes = spec.n_days * 1440 - spec.resolution_minutes;

  for (int i = 0; i < spec.n_homes; ++i) {
    const std::string home_id = home_name(i, spec.n_homes);
    const std::uint64_t home_seed = derive_seed(spec.seed, static_cast<std::uint64_t>(i));
    Rng rng(derive_seed(home_seed, "home"));
    const auto area = rng.bernoulli(spec.rural_fraction) ? ingest::AreaType::rural : ingest::AreaType::urban;
    const bool invalid = rng.bernoulli(spec.defects.invalid_range_homes);
    out.homes.push_back({home_id, std::string(ingest::to_string(area)), invalid});

    emit_meter_home(spec, DataType::load, spec.load, home_id, derive_seed(home_seed, "load"), load_out, out.labels);
    emit_meter_home(spec, DataType::pv, spec.pv, home_id, derive_seed(home_seed, "pv"), pv_out, out.labels);
    emit_trips_home(spec, home_id, area, derive_seed(home_seed, "ev"), out.trips_csv, out.trip_records, out.labels);

    // Valid homes omit at most one of the three fields; invalid ones keep only the start.
    const Instant start{spec.start_date};
    const Instant end = start + std::chrono::minutes{span_minutes};
    std::string s = format_instant(start), e = format_instant(end), d = std::to_string(span_minutes);
    if (invalid) {
      e.clear();
      d.clear();
    } else {
      switch (rng.below(4)) {
        case 1: s.clear(); break;
        case 2: e.clear(); break;
        case 3: d.clear(); break;
        default: break;
      }
    }
    out.validity_csv += home_id + "," + s + "," + e + "," + d + "\n";
  }
  out.load_csv = std::move(load_out.csv);
  out.pv_csv = std::move(pv_out.csv);
  out.load_records = load_out.records;
  out.pv_records = pv_out.records;

  json doc;
  doc["spec"] = {
      {"n_homes", spec.n_homes},
      {"n_days", spec.n_days},
      {"resolution_minutes", spec.resolution_minutes},
      {"start_date", format_date(spec.start_date)},
      {"seed", spec.seed},
      {"rural_fraction", spec.rural_fraction},
      {"defect_rates",
       {{"single_missing", spec.defects.single_missing},
        {"multi_gap_days", spec.defects.multi_gap_days},
        {"invalid_range_homes", spec.defects.invalid_range_homes}}},
      {"archetypes", {{"load", archetype_ids(spec.load)}, {"pv", archetype_ids(spec.pv)}, {"ev", archetype_ids(spec.ev)}}},
  };
  doc["emitted_records"] = {{"load", out.load_records}, {"pv", out.pv_records}, {"trips", out.trip_records}};
  json homes = json::array();
  for (const auto& h : out.homes) {
    homes.push_back({{"home_id", h.home_id}, {"area_type", h.area_type}, {"invalid_range", h.invalid_range}});
  }
  doc["homes"] = std::move(homes);
  json records = json::array();
  for (const auto& r : out.labels) {
    json rec = {{"home_id", r.home_id},
                {"date", format_date(r.date)},
                {"data_type", std::string(to_string(r.data_type))},
                {"archetype_id", r.archetype_id},
                {"factor", r.factor},
                {"defect_positions", r.defect_positions}};
    if (r.data_type == DataType::ev) rec["no_travel"] = r.no_travel;
    records.push_back(std::move(rec));
  }
  doc["records"] = std::move(records);
  out.labels_json = doc.dump(1) + "\n";
  return out;
}

}  // namespace hedge::corpus
