#include "hedge/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <set>

#include "csv_util.hpp"

namespace hedge::ingest {

namespace {

using std::chrono::minutes;
using std::chrono::seconds;

double minutes_between(Instant from, Instant to) {
  return static_cast<double>((to - from).count()) / 60.0;
}

void read_header(std::istream& in, std::string_view expected, std::size_t& line_no) {
  if (!in.good()) throw DataError("unreadable stream");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header, expected '" + std::string(expected) + "'");
  line_no = 1;
  if (detail::trim(line) != expected) {
    throw ParseError(1, "bad header '" + std::string(detail::trim(line)) + "', expected '" + std::string(expected) + "'");
  }
}

void check_malformed(std::size_t rows, std::size_t skipped, double max_fraction) {
  if (rows > 0 && static_cast<double>(skipped) > max_fraction * static_cast<double>(rows)) {
    throw DataError("too many malformed rows: " + std::to_string(skipped) + " of " + std::to_string(rows));
  }
}

// Energy fraction of an interval [s, e) (minutes from any origin aligned to
// the step grid) falling in each step; calls fn(step_index, overlap_minutes).
template <typename Fn>
void for_each_step_overlap(double s, double e, int step_minutes, Fn&& fn) {
  if (e <= s) return;
  const auto first = static_cast<long long>(std::floor(s / step_minutes));
  const auto last = static_cast<long long>(std::ceil(e / step_minutes)) - 1;
  for (long long k = first; k <= last; ++k) {
    const double lo = std::max(s, static_cast<double>(k * step_minutes));
    const double hi = std::min(e, static_cast<double>((k + 1) * step_minutes));
    if (hi > lo) fn(k, hi - lo);
  }
}

AreaType home_area(std::span<const RawTripRecord> trips) {
  for (const auto& t : trips) {
    if (t.area_type) return *t.area_type;
  }
  return AreaType::urban;
}

}  // namespace

std::string_view to_string(AreaType area) { return area == AreaType::urban ? "urban" : "rural"; }

Instant RawTripRecord::end() const {
  return start + seconds{static_cast<long long>(std::llround(duration_min * 60.0))};
}

void ConsumptionFactors::validate() const {
  const std::pair<const char*, double> fields[] = {
      {"factors.urban", urban},
      {"factors.rural", rural},
      {"factors.motorway", motorway},
      {"motorway_threshold_miles", motorway_threshold_miles},
      {"max_hourly_kwh", max_hourly_kwh},
      {"max_daily_kwh", max_daily_kwh},
  };
  for (const auto& [name, value] : fields) {
    if (!(value > 0.0)) throw InvalidArgument(name, "must be positive");
  }
}

double ConsumptionFactors::kwh_per_mile(double distance_miles, AreaType area) const {
  if (distance_miles > motorway_threshold_miles) return motorway;
  return area == AreaType::urban ? urban : rural;
}

// Parsing ---------------------------------------------------------------------

MeterParseResult parse_meter(std::istream& in, DataType data_type, double max_malformed_fraction) {
  std::size_t line_no = 0;
  read_header(in, kMeterHeader, line_no);
  MeterParseResult out;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    ++out.rows;
    const auto f = detail::split_fields(line);
    if (f.size() != 3 || f[0].empty()) {
      ++out.skipped;
      continue;
    }
    const auto ts = parse_instant(f[1]);
    const auto value = detail::parse_double(f[2]);
    if (!ts || !value || *value < 0.0) {
      ++out.skipped;
      continue;
    }
    out.readings.push_back({std::string(f[0]), *ts, *value, data_type});
  }
  if (in.bad()) throw DataError("read failure after line " + std::to_string(line_no));

  std::stable_sort(out.readings.begin(), out.readings.end(), [](const auto& a, const auto& b) {
    return std::tie(a.home_id, a.timestamp) < std::tie(b.home_id, b.timestamp);
  });
  // Timestamps must be strictly increasing per home; repeated ones are malformed.
  const auto dup = std::unique(out.readings.begin(), out.readings.end(), [](const auto& a, const auto& b) {
    return a.home_id == b.home_id && a.timestamp == b.timestamp;
  });
  out.skipped += static_cast<std::size_t>(out.readings.end() - dup);
  out.readings.erase(dup, out.readings.end());
  check_malformed(out.rows, out.skipped, max_malformed_fraction);
  return out;
}

TripParseResult parse_trips(std::istream& in, double max_malformed_fraction) {
  std::size_t line_no = 0;
  read_header(in, kTripHeader, line_no);
  TripParseResult out;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    ++out.rows;
    const auto f = detail::split_fields(line);
    if (f.size() != 7 || f[0].empty()) {
      ++out.skipped;
      continue;
    }
    const auto start = parse_instant(f[1]);
    const auto duration = detail::parse_double(f[2]);
    const auto distance = detail::parse_double(f[3]);
    const auto origin = detail::parse_flag(f[4]);
    const auto destination = detail::parse_flag(f[5]);
    std::optional<AreaType> area;
    bool area_ok = true;
    if (f[6] == "urban") {
      area = AreaType::urban;
    } else if (f[6] == "rural") {
      area = AreaType::rural;
    } else if (!f[6].empty()) {
      area_ok = false;
    }
    if (!start || !duration || !distance || !origin || !destination || !area_ok || *duration <= 0.0 ||
        *distance < 0.0) {
      ++out.skipped;
      continue;
    }
    out.trips.push_back({std::string(f[0]), *start, *duration, *distance, *origin, *destination, area});
  }
  if (in.bad()) throw DataError("read failure after line " + std::to_string(line_no));
  std::stable_sort(out.trips.begin(), out.trips.end(), [](const auto& a, const auto& b) {
    return std::tie(a.home_id, a.start) < std::tie(b.home_id, b.start);
  });
  check_malformed(out.rows, out.skipped, max_malformed_fraction);
  return out;
}

std::map<std::string, ValidityRange> parse_validity(std::istream& in) {
  std::size_t line_no = 0;
  read_header(in, kValidityHeader, line_no);
  std::map<std::string, ValidityRange> out;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != 4 || f[0].empty()) throw ParseError(line_no, "expected 4 fields");
    ValidityRange range;
    if (!f[1].empty()) {
      range.start = parse_instant(f[1]);
      if (!range.start) throw ParseError(line_no, "bad valid_start");
    }
    if (!f[2].empty()) {
      range.end = parse_instant(f[2]);
      if (!range.end) throw ParseError(line_no, "bad valid_end");
    }
    if (!f[3].empty()) {
      const auto d = detail::parse_double(f[3]);
      if (!d || *d < 0.0) throw ParseError(line_no, "bad valid_duration_min");
      range.duration = seconds{std::llround(*d * 60.0)};
    }
    out[std::string(f[0])] = range;
  }
  return out;
}

// Validity --------------------------------------------------------------------

ResolvedValidity resolve_validity(const ValidityRange& range) {
  const int known = int{range.start.has_value()} + int{range.end.has_value()} + int{range.duration.has_value()};
  ResolvedValidity out;
  if (known <= 1) return out;  // validity cannot be confirmed
  if (known == 3) {
    if (*range.end - *range.start != *range.duration) {
      out.status = ValidityStatus::inconsistent;
      return out;
    }
    out.start = *range.start;
    out.end = *range.end;
  } else if (!range.end) {
    out.start = *range.start;
    out.end = *range.start + *range.duration;
  } else if (!range.start) {
    out.start = *range.end - *range.duration;
    out.end = *range.end;
  } else {
    out.start = *range.start;
    out.end = *range.end;
  }
  out.status = out.end < out.start ? ValidityStatus::inconsistent : ValidityStatus::confirmed;
  return out;
}

ValidityOutcome enforce_validity(std::span<const RawMeterReading> readings, const ValidityRange& range) {
  const auto resolved = resolve_validity(range);
  ValidityOutcome out;
  out.status = resolved.status;
  if (resolved.status != ValidityStatus::confirmed) return out;
  for (const auto& r : readings) {
    if (r.timestamp >= resolved.start && r.timestamp <= resolved.end) out.readings.push_back(r);
  }
  return out;
}

// Trips -----------------------------------------------------------------------

TripFilterResult filter_trips(std::vector<RawTripRecord> trips, const ConsumptionFactors& factors,
                              int resolution_minutes) {
  steps_per_day(resolution_minutes);
  TripFilterResult out;

  // Homes that cannot be classified as urban or rural lose every trip.
  std::set<std::string> unclassified;
  for (const auto& t : trips) {
    if (!t.area_type) unclassified.insert(t.home_id);
  }
  std::vector<RawTripRecord> kept;
  kept.reserve(trips.size());
  const double step_cap = factors.max_hourly_kwh * resolution_minutes / 60.0;
  for (auto& t : trips) {
    if (unclassified.contains(t.home_id)) {
      ++out.removed_unclassified;
      continue;
    }
    const double energy = t.distance_miles * factors.kwh_per_mile(t.distance_miles, *t.area_type);
    const Instant epoch_day = std::chrono::floor<std::chrono::days>(t.start);
    const double s = minutes_between(epoch_day, t.start);
    double worst = 0.0;
    for_each_step_overlap(s, s + t.duration_min, resolution_minutes,
                          [&](long long, double overlap) { worst = std::max(worst, energy * overlap / t.duration_min); });
    if (worst > step_cap) {
      ++out.removed_hourly;
      continue;
    }
    kept.push_back(std::move(t));
  }

  // Daily totals per home-day, apportioning trips that cross midnight.
  std::map<std::pair<std::string, Date>, double> daily;
  for (const auto& t : kept) {
    const double energy = t.distance_miles * factors.kwh_per_mile(t.distance_miles, *t.area_type);
    const Date day0{std::chrono::floor<std::chrono::days>(t.start)};
    const double s = minutes_between(Instant{day0}, t.start);
    for_each_step_overlap(s, s + t.duration_min, 1440, [&](long long k, double overlap) {
      daily[{t.home_id, day0 + std::chrono::days{k}}] += energy * overlap / t.duration_min;
    });
  }
  std::set<std::pair<std::string, Date>> over;
  for (const auto& [key, kwh] : daily) {
    if (kwh > factors.max_daily_kwh) over.insert(key);
  }
  out.removed_days = over.size();
  out.unclassified_homes = unclassified;
  for (auto& t : kept) {
    const Date day0{std::chrono::floor<std::chrono::days>(t.start)};
    const double s = minutes_between(Instant{day0}, t.start);
    bool drop = false;
    for_each_step_overlap(s, s + t.duration_min, 1440, [&](long long k, double) {
      drop = drop || over.contains({t.home_id, day0 + std::chrono::days{k}});
    });
    if (drop) {
      ++out.removed_daily;
      for_each_step_overlap(s, s + t.duration_min, 1440, [&](long long k, double) {
        out.dropped_days.insert({t.home_id, day0 + std::chrono::days{k}});
      });
      continue;
    }
    out.trips.push_back(std::move(t));
  }
  return out;
}

EvDay trips_to_ev_day(std::span<const RawTripRecord> trips, const ConsumptionFactors& factors, int resolution_minutes,
                      Date date, AreaType area, bool away_at_start, const std::string& home_id) {
  const int steps = steps_per_day(resolution_minutes);
  EvDay out;
  auto& p = out.profile;
  p.home_id = home_id;
  p.date = date;
  p.day_type = day_type_of(date);
  p.data_type = DataType::ev;
  p.values.assign(static_cast<std::size_t>(steps), 0.0);
  p.availability.assign(static_cast<std::size_t>(steps), 1);

  const Instant day_start{date};
  const Instant day_end = day_start + std::chrono::days{1};
  std::vector<const RawTripRecord*> today;
  for (const auto& t : trips) {
    if (t.start < day_end && t.end() > day_start) today.push_back(&t);
  }
  std::stable_sort(today.begin(), today.end(), [](const auto* a, const auto* b) { return a->start < b->start; });
  for (std::size_t i = 1; i < today.size(); ++i) {
    if (today[i]->start < today[i - 1]->end()) out.overlapping = true;
  }

  auto mark_away = [&](double from, double to) {
    for_each_step_overlap(std::max(from, 0.0), std::min(to, 1440.0), resolution_minutes,
                          [&](long long k, double) { p.availability[static_cast<std::size_t>(k)] = 0; });
  };

  bool away = away_at_start;
  double away_from = 0.0;
  for (const auto* t : today) {
    const double s = minutes_between(day_start, t->start);
    const double e = s + t->duration_min;
    const double kwh_per_mile = factors.kwh_per_mile(t->distance_miles, area);
    for_each_step_overlap(std::max(s, 0.0), std::min(e, 1440.0), resolution_minutes, [&](long long k, double overlap) {
      const auto idx = static_cast<std::size_t>(k);
      p.values[idx] += t->distance_miles * overlap / t->duration_min * kwh_per_mile;
      p.availability[idx] = 0;  // driving
    });
    if (t->origin_home && s >= 0.0 && !away) {
      away = true;
      away_from = s;
    }
    if (t->destination_home && e <= 1440.0 && away) {
      mark_away(away_from, e);
      away = false;
    }
  }
  if (away) mark_away(away_from, 1440.0);
  out.away_at_end = away;
  return out;
}

EvDays ev_days_for_home(std::span<const RawTripRecord> trips, const ConsumptionFactors& factors, int resolution_minutes,
                        Date first, Date last) {
  EvDays out;
  const AreaType area = home_area(trips);
  const std::string home_id = trips.empty() ? std::string{} : trips.front().home_id;
  bool away = false;
  for (Date d = first; d <= last; d += std::chrono::days{1}) {
    auto day = trips_to_ev_day(trips, factors, resolution_minutes, d, area, away, home_id);
    away = day.away_at_end;
    if (day.overlapping) {
      ++out.discarded_overlap;
      continue;
    }
    out.days.push_back(std::move(day.profile));
  }
  return out;
}

// Resampling ------------------------------------------------------------------

DayProfile resample_day(std::span<const RawMeterReading> readings, Date date, int native_minutes, int target_minutes) {
  steps_per_day(native_minutes);
  const int steps = steps_per_day(target_minutes);
  if (target_minutes < native_minutes) {
    throw InvalidArgument("resolution_minutes", "target resolution " + std::to_string(target_minutes) +
                                                    " min is finer than the native " + std::to_string(native_minutes) +
                                                    " min");
  }
  if (target_minutes % native_minutes != 0) {
    throw InvalidArgument("resolution_minutes", "target resolution must be a multiple of the native resolution");
  }
  DayProfile p;
  p.date = date;
  p.day_type = day_type_of(date);
  if (!readings.empty()) {
    p.home_id = readings.front().home_id;
    p.data_type = readings.front().data_type;
  }
  if (p.data_type == DataType::load && target_minutes < 30) {
    throw InvalidArgument("resolution_minutes", "household loads need a resolution of at least 30 min");
  }
  p.values.assign(static_cast<std::size_t>(steps), 0.0);
  std::vector<bool> filled(static_cast<std::size_t>(steps), false);
  const Instant day_start{date};
  for (const auto& r : readings) {
    const auto minute = std::chrono::duration_cast<minutes>(r.timestamp - day_start).count();
    if (minute < 0 || minute >= 1440) continue;
    const auto bin = static_cast<std::size_t>(minute / target_minutes);
    p.values[bin] += r.value;
    filled[bin] = true;
  }
  for (std::size_t t = 0; t < filled.size(); ++t) {
    if (!filled[t]) p.gaps.push_back(t);
  }
  return p;
}

std::map<Date, std::span<const RawMeterReading>> split_days(std::span<const RawMeterReading> readings) {
  std::map<Date, std::span<const RawMeterReading>> out;
  std::size_t begin = 0;
  while (begin < readings.size()) {
    const Date day{std::chrono::floor<std::chrono::days>(readings[begin].timestamp)};
    std::size_t end = begin + 1;
    while (end < readings.size() && Date{std::chrono::floor<std::chrono::days>(readings[end].timestamp)} == day) ++end;
    out[day] = readings.subspan(begin, end - begin);
    begin = end;
  }
  return out;
}

std::optional<int> infer_native_minutes(std::span<const RawMeterReading> readings) {
  std::optional<long long> best;
  for (std::size_t i = 1; i < readings.size(); ++i) {
    if (readings[i].home_id != readings[i - 1].home_id) continue;
    const auto gap = (readings[i].timestamp - readings[i - 1].timestamp).count();
    if (gap > 0 && (!best || gap < *best)) best = gap;
  }
  if (!best) return std::nullopt;
  return static_cast<int>(std::max<long long>(1, *best / 60));
}

// Segmenting ------------------------------------------------------------------

RawCorpus assemble_corpus(std::vector<RawMeterReading> load, std::vector<RawMeterReading> pv,
                          std::vector<RawTripRecord> trips, const std::map<std::string, ValidityRange>& validity) {
  std::map<std::string, HomeRecords> homes;
  auto home = [&](const std::string& id) -> HomeRecords& {
    auto& h = homes[id];
    h.home_id = id;
    return h;
  };
  for (auto& r : load) home(r.home_id).load.push_back(std::move(r));
  for (auto& r : pv) home(r.home_id).pv.push_back(std::move(r));
  for (auto& t : trips) home(t.home_id).trips.push_back(std::move(t));
  for (auto& [id, h] : homes) {
    if (auto it = validity.find(id); it != validity.end()) h.validity = it->second;
  }
  RawCorpus out;
  out.homes.reserve(homes.size());
  for (auto& [id, h] : homes) out.homes.push_back(std::move(h));
  return out;
}

std::vector<RawCorpus> segment_homes(const RawCorpus& corpus, int n_segments) {
  if (n_segments < 1) throw InvalidArgument("n_segments", "must be at least 1");
  const auto n = static_cast<std::size_t>(n_segments);
  // Largest-first greedy assignment to the lightest segment.
  std::vector<std::size_t> order(corpus.homes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return corpus.homes[a].record_count() > corpus.homes[b].record_count();
  });
  std::vector<std::size_t> load(n, 0);
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t idx : order) {
    const auto target = static_cast<std::size_t>(std::min_element(load.begin(), load.end()) - load.begin());
    load[target] += corpus.homes[idx].record_count();
    members[target].push_back(idx);
  }
  std::vector<RawCorpus> out(n);
  for (std::size_t s = 0; s < n; ++s) {
    std::sort(members[s].begin(), members[s].end());
    for (std::size_t idx : members[s]) out[s].homes.push_back(corpus.homes[idx]);
  }
  return out;
}

}  // namespace hedge::ingest
