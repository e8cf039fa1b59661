#include <numeric>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hedge/corpus.hpp"
#include "hedge/ingest.hpp"

using namespace hedge;
using namespace hedge::ingest;
using std::chrono::hours;
using std::chrono::minutes;

namespace {

Instant at(int y, unsigned m, unsigned d, int h, int min = 0) {
  return Instant{fixture::date(y, m, d)} + hours{h} + minutes{min};
}

RawMeterReading reading(const char* home, Instant t, double v) { return {home, t, v, DataType::load}; }

RawTripRecord trip(Instant start, double duration, double miles, bool from_home, bool to_home,
                   std::optional<AreaType> area = AreaType::urban, const char* home = "h1") {
  return {home, start, duration, miles, from_home, to_home, area};
}

ConsumptionFactors uncapped() {
  ConsumptionFactors f = fixture::factors();
  f.max_hourly_kwh = 1e300;
  f.max_daily_kwh = 1e300;
  return f;
}

}  // namespace

// Parsing ---------------------------------------------------------------------

TEST(ParseMeter, HeaderOnlyGivesEmpty) {
  std::istringstream in("home_id,timestamp,kwh\n");
  const auto r = parse_meter(in, DataType::load);
  EXPECT_TRUE(r.readings.empty());
  EXPECT_EQ(r.skipped, 0u);
}

TEST(ParseMeter, SingleRow) {
  std::istringstream in("home_id,timestamp,kwh\nh1,2013-01-01T00:00:00Z,0.5\n");
  const auto r = parse_meter(in, DataType::pv);
  ASSERT_EQ(r.readings.size(), 1u);
  EXPECT_EQ(r.readings[0].home_id, "h1");
  EXPECT_EQ(r.readings[0].timestamp, at(2013, 1, 1, 0));
  EXPECT_EQ(r.readings[0].value, 0.5);
  EXPECT_EQ(r.readings[0].data_type, DataType::pv);
}

TEST(ParseMeter, MalformedRowsAreCountedUpToTheLimit) {
  std::string text = "home_id,timestamp,kwh\n";
  for (int i = 10; i < 50; ++i) text += "h1,2013-01-01T10:" + std::to_string(i) + ":00Z,1\n";
  std::istringstream ok(text + "h1,notatime,1\nh2,2013-01-01T00:00:00Z,-1\nh1,2013-01-01T10:10:00Z,2\n");
  const auto r = parse_meter(ok, DataType::load, 0.1);
  EXPECT_EQ(r.readings.size(), 40u);
  EXPECT_EQ(r.skipped, 3u);  // bad time, negative value, repeated timestamp
  std::istringstream bad(text + "x\ny\nz\n");
  EXPECT_THROW(parse_meter(bad, DataType::load, 0.05), DataError);
}

TEST(ParseMeter, MissingOrWrongHeaderIsFatalWithPosition) {
  std::istringstream empty("");
  EXPECT_THROW(parse_meter(empty, DataType::load), ParseError);
  std::istringstream wrong("id,time,value\n");
  try {
    parse_meter(wrong, DataType::load);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(ParseMeter, ReadingCountMatchesSidecar) {
  auto spec = corpus::reference_spec(12, 5, 30, 3);
  spec.defects = {0.02, 0.1, 0.0};
  const auto files = corpus::synth_corpus(spec);
  std::istringstream in(files.load_csv);
  EXPECT_EQ(parse_meter(in, DataType::load).readings.size(), files.load_records);
  std::istringstream trips(files.trips_csv);
  EXPECT_EQ(parse_trips(trips).trips.size(), files.trip_records);
}

TEST(ParseTrips, FieldsAndMissingArea) {
  std::istringstream in(std::string(kTripHeader) +
                        "\nh1,2013-01-01T09:00:00Z,30,5,1,0,urban\nh2,2013-01-01T10:00:00Z,15,2.5,0,1,\n");
  const auto r = parse_trips(in);
  ASSERT_EQ(r.trips.size(), 2u);
  EXPECT_TRUE(r.trips[0].origin_home);
  EXPECT_FALSE(r.trips[0].destination_home);
  EXPECT_EQ(r.trips[0].area_type, AreaType::urban);
  EXPECT_FALSE(r.trips[1].area_type);
  EXPECT_EQ(r.trips[0].end(), at(2013, 1, 1, 9, 30));
}

// Validity --------------------------------------------------------------------

namespace {

std::vector<RawMeterReading> five_readings() {
  std::vector<RawMeterReading> out;
  for (int h = 0; h < 5; ++h) out.push_back(reading("h1", at(2013, 1, 1, h), 1.0));
  return out;
}

}  // namespace

TEST(EnforceValidity, FullTripleCoveringEverythingIsIdentity) {
  const auto rs = five_readings();
  const ValidityRange r{at(2013, 1, 1, 0), at(2013, 1, 1, 4), std::chrono::hours{4}};
  const auto out = enforce_validity(rs, r);
  EXPECT_EQ(out.status, ValidityStatus::confirmed);
  EXPECT_EQ(out.readings, rs);
}

TEST(EnforceValidity, OnlyStartKnownDiscardsEverything) {
  const auto out = enforce_validity(five_readings(), ValidityRange{at(2013, 1, 1, 0), {}, {}});
  EXPECT_EQ(out.status, ValidityStatus::unconfirmed);
  EXPECT_TRUE(out.readings.empty());
  EXPECT_TRUE(enforce_validity(five_readings(), ValidityRange{}).readings.empty());
}

TEST(EnforceValidity, EndInferredFromStartAndDuration) {
  const auto out = enforce_validity(five_readings(), ValidityRange{at(2013, 1, 1, 1), {}, std::chrono::hours{2}});
  ASSERT_EQ(out.readings.size(), 3u);
  EXPECT_EQ(out.readings.front().timestamp, at(2013, 1, 1, 1));
  EXPECT_EQ(out.readings.back().timestamp, at(2013, 1, 1, 3));
}

TEST(EnforceValidity, StartInferredFromEndAndDuration) {
  const auto out = enforce_validity(five_readings(), ValidityRange{{}, at(2013, 1, 1, 2), std::chrono::hours{1}});
  ASSERT_EQ(out.readings.size(), 2u);
  EXPECT_EQ(out.readings.front().timestamp, at(2013, 1, 1, 1));
}

TEST(EnforceValidity, InconsistentTripleDiscardsHome) {
  const auto out = enforce_validity(five_readings(), ValidityRange{at(2013, 1, 1, 0), at(2013, 1, 1, 4), std::chrono::hours{3}});
  EXPECT_EQ(out.status, ValidityStatus::inconsistent);
  EXPECT_TRUE(out.readings.empty());
}

TEST(EnforceValidity, SurvivorsLieInsideTheResolvedRange) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<RawMeterReading> rs;
    for (int m = 0; m < 48; ++m) rs.push_back(reading("h", at(2013, 1, 1, 0, 30 * m), 1.0));
    const Instant s = at(2013, 1, 1, 0) + minutes{static_cast<int>(rng.below(1440))};
    const auto d = minutes{static_cast<int>(rng.below(1440))};
    ValidityRange range{s, s + d, d};
    switch (rng.below(3)) {
      case 0: range.start.reset(); break;
      case 1: range.end.reset(); break;
      default: range.duration.reset(); break;
    }
    const auto out = enforce_validity(rs, range);
    const auto resolved = resolve_validity(range);
    for (const auto& r : out.readings) {
      EXPECT_GE(r.timestamp, resolved.start);
      EXPECT_LE(r.timestamp, resolved.end);
    }
  }
}

// Trip filtering ----------------------------------------------------------------

TEST(FilterTrips, InfiniteCapsAreIdentity) {
  std::vector<RawTripRecord> trips{trip(at(2013, 1, 1, 9), 30, 5, true, false), trip(at(2013, 1, 1, 17), 30, 500, false, true)};
  const auto out = filter_trips(trips, uncapped(), 60);
  EXPECT_EQ(out.trips, trips);
}

TEST(FilterTrips, DailyCapRemovesTheDay) {
  auto f = fixture::factors();
  f.max_hourly_kwh = 1e6;
  f.max_daily_kwh = 80.0;  // 500 miles x 0.35 = 175 kWh
  std::vector<RawTripRecord> trips{trip(at(2013, 1, 1, 6), 600, 500, true, true),
                                   trip(at(2013, 1, 2, 9), 30, 5, true, true)};
  const auto out = filter_trips(trips, f, 60);
  ASSERT_EQ(out.trips.size(), 1u);
  EXPECT_EQ(out.trips[0].start, at(2013, 1, 2, 9));
  EXPECT_EQ(out.removed_days, 1u);
  EXPECT_TRUE(out.dropped_days.contains({"h1", fixture::date(2013, 1, 1)}));
}

TEST(FilterTrips, HourlyCapIsProRatedPerStep) {
  auto f = uncapped();
  f.max_hourly_kwh = 4.0;
  // 30 urban miles at 0.25 = 7.5 kWh spread over 2 h: 3.75 kWh per hour step, 1.875 per half hour.
  std::vector<RawTripRecord> trips{trip(at(2013, 1, 1, 9), 120, 9.9, true, true)};
  trips[0].distance_miles = 9.9;
  EXPECT_EQ(filter_trips(trips, f, 60).trips.size(), 1u);
  f.max_hourly_kwh = 1.0;
  const auto out = filter_trips(trips, f, 30);
  EXPECT_EQ(out.removed_hourly, 1u);
}

TEST(FilterTrips, UnclassifiedHomesLoseEveryTrip) {
  std::vector<RawTripRecord> trips{trip(at(2013, 1, 1, 9), 30, 5, true, false, std::nullopt, "h2"),
                                   trip(at(2013, 1, 1, 9), 30, 5, true, false, AreaType::rural, "h3")};
  const auto out = filter_trips(trips, uncapped(), 60);
  ASSERT_EQ(out.trips.size(), 1u);
  EXPECT_EQ(out.trips[0].home_id, "h3");
  EXPECT_EQ(out.removed_unclassified, 1u);
}

// EV days ---------------------------------------------------------------------

TEST(EvDay, NoTripsMeansZeroDemandAndAlwaysHome) {
  const auto day = trips_to_ev_day({}, fixture::factors(), 60, fixture::date(2013, 1, 7), AreaType::urban, false, "h1");
  EXPECT_EQ(day.profile.values, std::vector<double>(24, 0.0));
  EXPECT_EQ(day.profile.availability, std::vector<std::uint8_t>(24, 1));
  EXPECT_EQ(day.profile.data_type, DataType::ev);
}

TEST(EvDay, LongTripsUseTheMotorwayFactor) {
  const std::vector<RawTripRecord> trips{trip(at(2013, 1, 7, 9), 60, 12, true, true)};
  const auto day = trips_to_ev_day(trips, fixture::factors(), 60, fixture::date(2013, 1, 7), AreaType::urban, false, "h1");
  EXPECT_NEAR(day.profile.values[9], 12 * 0.35, 1e-12);
  EXPECT_EQ(fixture::factors().kwh_per_mile(10.0, AreaType::rural), 0.3);
  EXPECT_EQ(fixture::factors().kwh_per_mile(10.5, AreaType::rural), 0.35);
}

TEST(EvDay, CommuteHandTrace) {
  // Out 09:00-09:30, back 16:30-17:00, 5 urban miles each way.
  const std::vector<RawTripRecord> trips{trip(at(2013, 1, 7, 9), 30, 5, true, false),
                                         trip(at(2013, 1, 7, 16, 30), 30, 5, false, true)};
  const auto day = trips_to_ev_day(trips, fixture::factors(), 60, fixture::date(2013, 1, 7), AreaType::urban, false, "h1");
  for (int t = 0; t < 24; ++t) {
    EXPECT_EQ(day.profile.availability[static_cast<std::size_t>(t)], (t >= 9 && t <= 16) ? 0 : 1) << t;
    const double v = day.profile.values[static_cast<std::size_t>(t)];
    if (t == 9 || t == 16) {
      EXPECT_NEAR(v, 5 * 0.25, 1e-12) << t;
    } else {
      EXPECT_EQ(v, 0.0) << t;
    }
  }
  EXPECT_FALSE(day.away_at_end);
}

TEST(EvDay, EnergyEqualsDistanceTimesFactor) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RawTripRecord> trips;
    double expected = 0.0;
    int clock = static_cast<int>(rng.below(120));
    while (clock < 1300) {
      const int dur = 5 + static_cast<int>(rng.below(90));
      const double miles = rng.uniform(0.5, 20.0);
      if (clock + dur > 1440) break;
      trips.push_back(trip(at(2013, 1, 7, 0, clock), dur, miles, rng.bernoulli(0.5), rng.bernoulli(0.5)));
      expected += miles * fixture::factors().kwh_per_mile(miles, AreaType::urban);
      clock += dur + static_cast<int>(rng.below(200));
    }
    const auto day = trips_to_ev_day(trips, fixture::factors(), 30, fixture::date(2013, 1, 7), AreaType::urban, false, "h1");
    EXPECT_NEAR(std::accumulate(day.profile.values.begin(), day.profile.values.end(), 0.0), expected, 1e-9);
    EXPECT_FALSE(day.overlapping);
    for (std::size_t t = 0; t < 48; ++t) {
      if (day.profile.values[t] > 0.0) {
        EXPECT_EQ(day.profile.availability[t], 0);
      }
    }
  }
}

TEST(EvDay, TripsCrossingMidnightAreSplit) {
  const std::vector<RawTripRecord> trips{trip(at(2013, 1, 7, 23), 120, 10, true, true)};
  const auto days = ev_days_for_home(trips, fixture::factors(), 60, fixture::date(2013, 1, 7), fixture::date(2013, 1, 8));
  ASSERT_EQ(days.days.size(), 2u);
  EXPECT_NEAR(days.days[0].values[23], 5 * 0.25, 1e-12);
  EXPECT_NEAR(days.days[1].values[0], 5 * 0.25, 1e-12);
  EXPECT_EQ(days.days[1].availability[0], 0);
  EXPECT_EQ(days.days[1].availability[1], 1);
}

TEST(EvDay, AwayStateCarriesAcrossMidnight) {
  const std::vector<RawTripRecord> trips{trip(at(2013, 1, 7, 20), 30, 5, true, false),
                                         trip(at(2013, 1, 8, 7), 30, 5, false, true)};
  const auto days = ev_days_for_home(trips, fixture::factors(), 60, fixture::date(2013, 1, 7), fixture::date(2013, 1, 8));
  ASSERT_EQ(days.days.size(), 2u);
  for (int t = 20; t < 24; ++t) EXPECT_EQ(days.days[0].availability[static_cast<std::size_t>(t)], 0);
  for (int t = 0; t < 8; ++t) EXPECT_EQ(days.days[1].availability[static_cast<std::size_t>(t)], 0);
  EXPECT_EQ(days.days[1].availability[8], 1);
}

TEST(EvDay, TripAwayFromHomeLeavesAvailabilityOutsideDriving) {
  const std::vector<RawTripRecord> trips{trip(at(2013, 1, 7, 10), 30, 5, false, false)};
  const auto day = trips_to_ev_day(trips, fixture::factors(), 60, fixture::date(2013, 1, 7), AreaType::urban, false, "h1");
  EXPECT_EQ(std::count(day.profile.availability.begin(), day.profile.availability.end(), 0), 1);
}

TEST(EvDay, OverlappingTripsDiscardTheDay) {
  const std::vector<RawTripRecord> trips{trip(at(2013, 1, 7, 9), 60, 5, true, false),
                                         trip(at(2013, 1, 7, 9, 30), 60, 5, false, true)};
  const auto days = ev_days_for_home(trips, fixture::factors(), 60, fixture::date(2013, 1, 7), fixture::date(2013, 1, 7));
  EXPECT_TRUE(days.days.empty());
  EXPECT_EQ(days.discarded_overlap, 1u);
}

// Resampling ------------------------------------------------------------------

TEST(ResampleDay, IdentityAtNativeResolution) {
  std::vector<RawMeterReading> rs;
  for (int m = 0; m < 48; ++m) rs.push_back(reading("h1", at(2013, 1, 1, 0, 30 * m), 0.01 * m));
  const auto p = resample_day(rs, fixture::date(2013, 1, 1), 30, 30);
  ASSERT_EQ(p.steps(), 48);
  for (int m = 0; m < 48; ++m) EXPECT_EQ(p.values[static_cast<std::size_t>(m)], 0.01 * m);
  EXPECT_TRUE(p.gaps.empty());
}

TEST(ResampleDay, SumsIntoHourlyBins) {
  const std::vector<RawMeterReading> rs{reading("h1", at(2013, 1, 1, 0), 0.1), reading("h1", at(2013, 1, 1, 0, 30), 0.3)};
  const auto p = resample_day(rs, fixture::date(2013, 1, 1), 30, 60);
  EXPECT_NEAR(p.values[0], 0.4, 1e-15);
  EXPECT_EQ(p.gaps.size(), 23u);
}

TEST(ResampleDay, GapOnlyWhenTheWholeBinIsEmpty) {
  std::vector<RawMeterReading> rs;
  for (int m = 0; m < 48; ++m) {
    if (m == 4 || m == 10 || m == 11) continue;
    rs.push_back(reading("h1", at(2013, 1, 1, 0, 30 * m), 1.0));
  }
  const auto p = resample_day(rs, fixture::date(2013, 1, 1), 30, 60);
  EXPECT_EQ(p.gaps, std::vector<std::size_t>{5});
  EXPECT_EQ(p.values[2], 1.0);
}

TEST(ResampleDay, RejectsFinerTargets) {
  EXPECT_THROW(resample_day({}, fixture::date(2013, 1, 1), 60, 30), InvalidArgument);
  const std::vector<RawMeterReading> rs{reading("h1", at(2013, 1, 1, 0), 0.1)};
  EXPECT_THROW(resample_day(rs, fixture::date(2013, 1, 1), 5, 15), InvalidArgument);  // loads need >= 30 min
}

TEST(ResampleDay, CorpusDaysConserveTheirLabelFactor) {
  const auto files = corpus::synth_corpus(corpus::reference_spec(5, 4, 30, 9));
  const auto raw = fixture::parse(files);
  std::map<std::pair<std::string, Date>, double> factor;
  for (const auto& l : files.labels)
    if (l.data_type == DataType::load) factor[{l.home_id, l.date}] = l.factor;
  std::size_t checked = 0;
  for (const auto& home : raw.homes) {
    for (const auto& [d, rs] : split_days(home.load)) {
      for (int target : {30, 60, 120, 1440}) {
        const auto p = resample_day(rs, d, 30, target);
        EXPECT_NEAR(std::accumulate(p.values.begin(), p.values.end(), 0.0), (factor[{home.home_id, d}]), 1e-9);
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 20u);
}

TEST(InferNativeMinutes, SmallestSpacing) {
  const std::vector<RawMeterReading> rs{reading("a", at(2013, 1, 1, 0), 1), reading("a", at(2013, 1, 1, 2), 1),
                                        reading("b", at(2013, 1, 1, 0), 1), reading("b", at(2013, 1, 1, 0, 30), 1)};
  EXPECT_EQ(infer_native_minutes(rs), 30);
  EXPECT_FALSE(infer_native_minutes({}));
}

// Segmenting ------------------------------------------------------------------

namespace {

RawCorpus homes_with_counts(const std::vector<int>& counts) {
  RawCorpus c;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    HomeRecords h;
    h.home_id = "h" + std::to_string(1000 + i);
    for (int k = 0; k < counts[i]; ++k) h.load.push_back(reading(h.home_id.c_str(), at(2013, 1, 1, 0, k), 1.0));
    c.homes.push_back(std::move(h));
  }
  return c;
}

}  // namespace

TEST(SegmentHomes, OneSegmentIsTheInput) {
  const auto c = homes_with_counts({3, 1, 4});
  const auto segs = segment_homes(c, 1);
  ASSERT_EQ(segs.size(), 1u);
  EXPECT_EQ(segs[0].homes, c.homes);
}

TEST(SegmentHomes, FourEqualHomesIntoTwo) {
  const auto segs = segment_homes(homes_with_counts({5, 5, 5, 5}), 2);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_EQ(segs[0].homes.size(), 2u);
  EXPECT_EQ(segs[1].homes.size(), 2u);
}

TEST(SegmentHomes, PartitionOfAThousandHomes) {
  Rng rng(4);
  std::vector<int> counts(1000);
  for (int& c : counts) c = 1 + static_cast<int>(rng.below(30));
  const auto corpus = homes_with_counts(counts);
  const auto segs = segment_homes(corpus, 8);
  std::set<std::string> seen;
  std::size_t total = 0, lo = SIZE_MAX, hi = 0;
  for (const auto& s : segs) {
    std::size_t records = 0;
    for (const auto& h : s.homes) {
      EXPECT_TRUE(seen.insert(h.home_id).second) << "home in two segments";
      const auto it = std::find_if(corpus.homes.begin(), corpus.homes.end(), [&](const auto& x) { return x.home_id == h.home_id; });
      EXPECT_EQ(h, *it);
      records += h.record_count();
    }
    total += s.homes.size();
    lo = std::min(lo, records);
    hi = std::max(hi, records);
  }
  EXPECT_EQ(total, 1000u);
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_LE(hi - lo, 30u);
  EXPECT_THROW(segment_homes(corpus, 0), InvalidArgument);
}

TEST(AssembleCorpus, GroupsByHomeAndAttachesValidity) {
  std::map<std::string, ValidityRange> validity{{"b", ValidityRange{at(2013, 1, 1, 0), {}, {}}}};
  const auto c = assemble_corpus({reading("b", at(2013, 1, 1, 0), 1), reading("a", at(2013, 1, 1, 0), 1)}, {},
                                 {trip(at(2013, 1, 1, 9), 10, 1, true, true, AreaType::urban, "c")}, validity);
  ASSERT_EQ(c.homes.size(), 3u);
  EXPECT_EQ(c.homes[0].home_id, "a");
  EXPECT_FALSE(c.homes[0].validity);
  EXPECT_TRUE(c.homes[1].validity);
  EXPECT_EQ(c.homes[2].trips.size(), 1u);
}

TEST(ConsumptionFactors, NoDefaultsAndPositivity) {
  EXPECT_THROW(ConsumptionFactors{}.validate(), InvalidArgument);
  EXPECT_NO_THROW(fixture::factors().validate());
  auto f = fixture::factors();
  f.rural = -1;
  try {
    f.validate();
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_EQ(e.field(), "factors.rural");
  }
}
