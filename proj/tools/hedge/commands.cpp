#include "commands.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "hedge/corpus.hpp"
#include "hedge/eval.hpp"
#include "hedge/generator.hpp"
#include "hedge/ingest.hpp"
#include "hedge/persist.hpp"
#include "hedge/pipeline.hpp"
#include "manifest.hpp"

namespace hedge::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kLoadCsv = "load.csv";
constexpr const char* kPvCsv = "pv.csv";
constexpr const char* kTripsCsv = "trips.csv";
constexpr const char* kValidityCsv = "validity.csv";
constexpr const char* kLabelsJson = "labels.json";
constexpr const char* kPrepareReport = "prepare_report.json";
constexpr const char* kTrainReport = "train_report.json";
constexpr const char* kEvalReport = "eval_report.json";

Manifest start_manifest(const RunConfig& cfg, std::string command) {
  Manifest m;
  m.command = std::move(command);
  m.seed = cfg.seed;
  m.config = cfg.entries();
  return m;
}

std::string str(DataType t) { return std::string(to_string(t)); }
std::string str(DayType d) { return std::string(to_string(d)); }

std::string format_value(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Removes per-cluster GAN directories below `{artifacts}/{type}/{day}/`.
void clear_gans(const fs::path& artifacts) {
  for (DataType type : kDataTypes) {
    for (DayType day : kDayTypes) {
      const fs::path dir = artifacts / str(type) / str(day);
      if (!fs::is_directory(dir)) continue;
      std::vector<fs::path> doomed;
      for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (e.is_directory() && !name.empty() && name.find_first_not_of("0123456789") == std::string::npos) {
          doomed.push_back(e.path());
        }
      }
      for (const auto& p : doomed) fs::remove_all(p);
    }
  }
}

json counters_json(const pipeline::PrepareCounters& c) {
  json bins;
  for (const auto& [type, n] : c.bins_collapsed) bins[str(type)] = n;
  return {
      {"homes_in", c.homes_in},
      {"homes_unconfirmed", c.homes_unconfirmed},
      {"homes_inconsistent", c.homes_inconsistent},
      {"homes_without_validity", c.homes_without_validity},
      {"readings_outside_validity", c.readings_outside_validity},
      {"days_resampled", c.days_resampled},
      {"days_filled", c.days_filled},
      {"days_discarded_gaps", c.days_discarded_gaps},
      {"ev_days", c.ev_days},
      {"ev_days_discarded_overlap", c.ev_days_discarded_overlap},
      {"trips_removed_unclassified", c.trips_removed_unclassified},
      {"trips_removed_hourly", c.trips_removed_hourly},
      {"trips_removed_daily", c.trips_removed_daily},
      {"bins_collapsed", bins},
  };
}

std::string trace_csv(const std::vector<gan::EpochStats>& trace) {
  std::string out =
      "epoch,learning_rate,noise,d_loss,g_adv_loss,sum_penalty,percentile_penalty,percentile_distance,"
      "mean_population_sum\n";
  for (const auto& s : trace) {
    out += std::to_string(s.epoch);
    for (double v : {s.learning_rate, s.noise, s.d_loss, s.g_adv_loss, s.sum_penalty, s.percentile_penalty,
                     s.percentile_distance, s.mean_population_sum}) {
      out += "," + format_value(v);
    }
    out += "\n";
  }
  return out;
}

std::string key_slug(const gan::GanKey& key) {
  return str(key.data_type) + "_" + str(key.day_type) + "_" + std::to_string(key.cluster);
}

// Artifacts of one data type including GANs; missing keys are named by path.
engine::DataTypeArtifacts load_complete(const persist::ArtifactLayout& layout, DataType type, int population) {
  auto art = persist::load_artifacts(layout, type, true);
  art.population = population;
  try {
    art.check_complete();
  } catch (const MissingArtifact& e) {
    throw MissingArtifact((layout.root / e.key()).string());
  }
  return art;
}

json eval_json(const eval::EvalReport& r) {
  json j{
      {"clusters", r.clusters},
      {"excluded_clusters", r.excluded_clusters},
      {"random_baseline", r.random_baseline},
      {"centroid_baseline_accuracy", r.centroid_baseline_accuracy ? json(*r.centroid_baseline_accuracy) : json()},
      {"repetitions", r.repetitions},
      {"tstr_accuracy", r.tstr_accuracy},
      {"trts_accuracy", r.trts_accuracy},
      {"tstr_per_repetition", r.tstr_per_repetition},
      {"trts_per_repetition", r.trts_per_repetition},
  };
  return j;
}

}  // namespace

std::string_view to_string(Figure figure) {
  switch (figure) {
    case Figure::fill_compare: return "fill_compare";
    case Figure::clusters: return "clusters";
    case Figure::bands: return "bands";
    case Figure::tstr: return "tstr";
    case Figure::factor_matrix: return "factor_matrix";
  }
  return "?";
}

Figure parse_figure(std::string_view text) {
  for (Figure f : kFigures) {
    if (to_string(f) == text) return f;
  }
  throw ConfigError("--figure", "unknown figure '" + std::string(text) + "'");
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidArgument*>(&e)) return 2;
  if (dynamic_cast<const MissingArtifact*>(&e)) return 3;
  if (dynamic_cast<const DataError*>(&e)) return 4;
  if (dynamic_cast<const gan::TrainingDiverged*>(&e)) return 4;
  return 1;
}

// corpus ---------------------------------------------------------------------

void cmd_corpus(const RunConfig& cfg) {
  const auto& c = cfg.corpus;
  auto spec = corpus::reference_spec(c.n_homes, c.n_days, c.resolution_minutes, derive_seed(cfg.seed, "corpus"));
  spec.start_date = c.start_date;
  spec.defects = {c.single_missing, c.multi_gap_days, c.invalid_range_homes};
  spec.rural_fraction = c.rural_fraction;
  const auto files = corpus::synth_corpus(spec);

  const fs::path dir = cfg.paths.data();
  auto m = start_manifest(cfg, "corpus");
  for (const auto& [name, text] : {std::pair{kLoadCsv, &files.load_csv}, std::pair{kPvCsv, &files.pv_csv},
                                   std::pair{kTripsCsv, &files.trips_csv},
                                   std::pair{kValidityCsv, &files.validity_csv},
                                   std::pair{kLabelsJson, &files.labels_json}}) {
    persist::write_text(dir / name, *text);
    m.add_output(cfg.paths.root, dir / name);
  }
  write_manifest(dir, m);
  spdlog::info("corpus: {} homes x {} days -> {} ({} load, {} pv, {} trip records)", c.n_homes, c.n_days,
               dir.string(), files.load_records, files.pv_records, files.trip_records);
}

// prepare --------------------------------------------------------------------

void cmd_prepare(const RunConfig& cfg) {
  cfg.require_factors();
  const fs::path data = cfg.paths.data();
  const fs::path out = cfg.paths.artifacts();
  auto m = start_manifest(cfg, "prepare");

  auto read_input = [&](const char* name) {
    auto text = persist::read_text(data / name);
    m.add_input(cfg.paths.root, data / name);
    return text;
  };
  std::istringstream load_in(read_input(kLoadCsv));
  std::istringstream pv_in(read_input(kPvCsv));
  std::istringstream trips_in(read_input(kTripsCsv));
  std::istringstream validity_in(read_input(kValidityCsv));

  auto in_file = [&](const char* name, auto&& fn) {
    try {
      return fn();
    } catch (const DataError& e) {
      throw DataError((data / name).string() + ": " + e.what());
    }
  };
  auto load = in_file(kLoadCsv, [&] { return ingest::parse_meter(load_in, DataType::load, cfg.max_malformed_fraction); });
  auto pv = in_file(kPvCsv, [&] { return ingest::parse_meter(pv_in, DataType::pv, cfg.max_malformed_fraction); });
  auto trips = in_file(kTripsCsv, [&] { return ingest::parse_trips(trips_in, cfg.max_malformed_fraction); });
  const auto validity = in_file(kValidityCsv, [&] { return ingest::parse_validity(validity_in); });
  spdlog::info("prepare: parsed {} load, {} pv readings, {} trips ({} malformed rows skipped)", load.readings.size(),
               pv.readings.size(), trips.trips.size(), load.skipped + pv.skipped + trips.skipped);

  auto raw = ingest::assemble_corpus(std::move(load.readings), std::move(pv.readings), std::move(trips.trips), validity);
  auto pc = cfg.prepare;
  pc.seed = derive_seed(cfg.seed, "prepare");
  const auto prepared = pipeline::prepare(raw, pc);

  for (DataType type : kDataTypes) fs::remove_all(out / str(type));
  fs::remove(out / kPrepareReport);
  fs::remove(out / kTrainReport);
  fs::remove(manifest_path(out, "train"));
  const persist::ArtifactLayout layout{out};
  persist::save_prepared(prepared, layout);

  json report;
  report["steps"] = prepared.steps;
  report["resolution_minutes"] = pc.resolution_minutes;
  report["parse"] = {{"load_rows", load.rows},   {"load_skipped", load.skipped},   {"pv_rows", pv.rows},
                     {"pv_skipped", pv.skipped}, {"trip_rows", trips.rows},        {"trip_skipped", trips.skipped}};
  report["counters"] = counters_json(prepared.counters);
  std::map<DataType, std::map<DayType, std::map<int, std::size_t>>> counts;
  for (const auto& d : prepared.days) ++counts[d.data_type][d.day_type()][d.cluster];
  json clusters = json::object();
  for (const auto& [type, per_day] : counts) {
    for (const auto& [day, per_cluster] : per_day) {
      for (const auto& [c, n] : per_cluster) clusters[str(type)][str(day)][std::to_string(c)] = n;
    }
  }
  report["days_per_cluster"] = clusters;
  if (prepared.fill_report) {
    json methods = json::array();
    for (const auto& e : prepared.fill_report->methods) {
      methods.push_back({{"method", std::string(prep::to_string(e.method))},
                         {"mean_abs_error", e.mean_abs_error},
                         {"p99_abs_error", e.p99_abs_error},
                         {"points", e.points}});
    }
    report["fill_comparison"] = methods;
    report["best_fill_method"] = std::string(prep::to_string(prepared.fill_report->best_mean()));
  }
  persist::write_text(out / kPrepareReport, report.dump(2) + "\n");

  m.add_outputs_under(cfg.paths.root, out);
  write_manifest(out, m);
  spdlog::info("prepare: {} profile days at {} steps/day -> {}", prepared.days.size(), prepared.steps, out.string());
}

// train ----------------------------------------------------------------------

void cmd_train(const RunConfig& cfg) {
  const fs::path dir = cfg.paths.artifacts();
  const persist::ArtifactLayout layout{dir};
  const auto prepared = persist::load_prepared(layout);
  clear_gans(dir);
  fs::remove(dir / kTrainReport);

  auto m = start_manifest(cfg, "train");
  m.add_inputs_under(cfg.paths.root, dir);

  auto options = cfg.train;
  options.gan.seed = derive_seed(cfg.seed, "train");
  const auto trained = pipeline::train_all(prepared, options);

  json keys = json::array();
  for (const auto& t : trained) {
    persist::save_gan(t.result.weights, layout);
    const fs::path trace_path = layout.gan(t.key).parent_path() / "trace.csv";
    persist::write_text(trace_path, trace_csv(t.result.trace));
    m.add_output(cfg.paths.root, layout.gan(t.key));
    m.add_output(cfg.paths.root, trace_path);
    const auto& first = t.result.trace.front();
    const auto& last = t.result.trace.back();
    keys.push_back({{"key", gan::to_string(t.key)},
                    {"profiles", t.profiles},
                    {"epochs", static_cast<int>(t.result.trace.size())},
                    {"percentile_distance_first", first.percentile_distance},
                    {"percentile_distance_final", last.percentile_distance},
                    {"mean_population_sum_final", last.mean_population_sum}});
    spdlog::info("train: {} on {} profiles, l2/W2 {:.4g} -> {:.4g}", gan::to_string(t.key), t.profiles,
                 first.percentile_distance, last.percentile_distance);
  }
  persist::write_text(dir / kTrainReport, json{{"gans", keys}}.dump(2) + "\n");
  m.add_output(cfg.paths.root, dir / kTrainReport);
  write_manifest(dir, m);
  spdlog::info("train: {} GANs -> {}", trained.size(), dir.string());
}

// generate -------------------------------------------------------------------

void cmd_generate(const RunConfig& cfg) {
  const persist::ArtifactLayout layout{cfg.paths.artifacts()};
  const fs::path dir = cfg.paths.output() / "generated";
  auto m = start_manifest(cfg, "generate");

  std::vector<engine::DataTypeArtifacts> arts;
  for (DataType type : cfg.generate.data_types) {
    arts.push_back(load_complete(layout, type, cfg.train.gan.population));
    arts.back().driving_threshold = cfg.generate.ev_driving_threshold;
    m.add_inputs_under(cfg.paths.root, layout.root / str(type));
  }

  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && e.path().extension() == ".csv") fs::remove(e.path());
    }
  }
  const std::uint64_t base = derive_seed(cfg.seed, "generate");
  for (int h = 0; h < cfg.generate.n_homes; ++h) {
    char id[32];
    std::snprintf(id, sizeof id, "gen_%04d", h);
    std::string csv = "date,data_type,step,value_kwh,available\n";
    for (const auto& art : arts) {
      const auto seq = engine::generate_sequence(art, id, cfg.generate.start_date, cfg.generate.n_days,
                                                 derive_seed(base, std::string(id) + "/" + str(art.data_type)));
      for (const auto& day : seq) {
        const std::string prefix = format_date(day.date) + "," + str(art.data_type) + ",";
        for (std::size_t t = 0; t < day.values.size(); ++t) {
          csv += prefix + std::to_string(t) + "," + format_value(day.values[t]) + ",";
          if (!day.availability.empty()) csv += day.availability[t] ? "1" : "0";
          csv += "\n";
        }
      }
    }
    const fs::path file = dir / (std::string(id) + ".csv");
    persist::write_text(file, csv);
    m.add_output(cfg.paths.root, file);
  }
  write_manifest(dir, m);
  spdlog::info("generate: {} homes x {} days -> {}", cfg.generate.n_homes, cfg.generate.n_days, dir.string());
}

// evaluate -------------------------------------------------------------------

void cmd_evaluate(const RunConfig& cfg) {
  const persist::ArtifactLayout layout{cfg.paths.artifacts()};
  const fs::path dir = cfg.paths.output() / "evaluate";
  const auto& ec = cfg.evaluate;
  auto m = start_manifest(cfg, "evaluate");

  const auto prepared = persist::load_prepared(layout);
  m.add_inputs_under(cfg.paths.root, layout.root);
  fs::remove_all(dir);

  // Percentile bands of every trained key against its real cluster.
  json bands = json::array();
  for (const auto& [type, base_art] : prepared.artifacts) {
    const auto art = load_complete(layout, type, cfg.train.gan.population);
    for (const auto& [key, weights] : art.gans) {
      const auto real = pipeline::training_profiles(prepared, key);
      if (real.size() < 2) continue;
      const auto generated = gan::sample_population(weights, ec.band_population,
                                                    derive_seed(cfg.seed, "evaluate/bands/" + gan::to_string(key)));
      const auto real_bands = eval::percentile_bands(real);
      const auto gen_bands = eval::percentile_bands(generated);
      for (const auto& [suffix, b] : {std::pair{"real", &real_bands}, std::pair{"generated", &gen_bands}}) {
        std::ostringstream csv;
        eval::write_bands_csv(csv, *b);
        const fs::path file = dir / "bands" / (key_slug(key) + "_" + suffix + ".csv");
        persist::write_text(file, csv.str());
      }
      std::vector<double> values;
      std::vector<double> lo;
      std::vector<double> hi;
      for (const auto& p : generated) {
        values.insert(values.end(), p.begin(), p.end());
        lo.insert(lo.end(), real_bands.p10().begin(), real_bands.p10().end());
        hi.insert(hi.end(), real_bands.p90().begin(), real_bands.p90().end());
      }
      bands.push_back({{"key", gan::to_string(key)},
                       {"real_profiles", real.size()},
                       {"generated_within_real_p10_p90", eval::band_coverage(lo, hi, values)},
                       {"real_median_within_generated_p10_p90",
                        eval::band_coverage(gen_bands.p10(), gen_bands.p90(), real_bands.p50())}});
    }
  }

  // TSTR / TRTS on one (data_type, day_type).
  const auto model_it = prepared.artifacts.find(ec.data_type);
  if (model_it == prepared.artifacts.end()) throw MissingArtifact(layout.profiles(ec.data_type).string());
  const auto& model = model_it->second.cluster_models.at(ec.day_type);

  std::map<int, std::vector<const pipeline::PreparedDay*>> by_cluster;
  for (const auto& d : prepared.days) {
    if (d.data_type == ec.data_type && d.day_type() == ec.day_type && !d.profile.zero_day) {
      by_cluster[d.cluster].push_back(&d);
    }
  }
  Rng pick(derive_seed(cfg.seed, "evaluate/subsample"));
  std::vector<std::vector<double>> profiles;
  std::vector<int> labels;
  for (auto& [cluster, days] : by_cluster) {
    if (ec.max_profiles_per_cluster > 0 && days.size() > static_cast<std::size_t>(ec.max_profiles_per_cluster)) {
      pick.shuffle(days.begin(), days.end());
      days.resize(static_cast<std::size_t>(ec.max_profiles_per_cluster));
    }
    for (const auto* d : days) {
      profiles.push_back(d->profile.values);
      labels.push_back(cluster);
    }
  }

  eval::EvalConfig evc;
  evc.gan = cfg.train.gan;
  evc.gan.n_epochs = ec.n_epochs;
  evc.classifier.epochs = ec.classifier_epochs;
  evc.repetitions = ec.repetitions;
  evc.seed = derive_seed(cfg.seed, "evaluate/tstr");
  const eval::BaselineClassifier baseline = [&model](const std::vector<double>& v) {
    const prep::NormalisedProfile p{v, false};
    return prep::nearest_centroid(model.centroids, prep::extract_features(p, model.feature_spec));
  };
  spdlog::info("evaluate: TSTR/TRTS on {}/{} ({} profiles, {} repetitions)", str(ec.data_type), str(ec.day_type),
               profiles.size(), ec.repetitions);
  const auto report = eval::evaluate(profiles, labels, evc, baseline);
  for (int c : report.excluded_clusters) spdlog::warn("evaluate: cluster {} has too few profiles; excluded", c);

  std::optional<eval::EvalReport> ablation;
  if (ec.ablation) {
    auto zero = evc;
    zero.gan.n_epochs = 0;
    ablation = eval::evaluate(profiles, labels, zero, baseline);
  }

  json j;
  j["data_type"] = str(ec.data_type);
  j["day_type"] = str(ec.day_type);
  j["profiles"] = profiles.size();
  j["gan_epochs"] = ec.n_epochs;
  j["trained"] = eval_json(report);
  j["epoch0"] = ablation ? eval_json(*ablation) : json();
  j["bands"] = bands;
  persist::write_text(dir / kEvalReport, j.dump(2) + "\n");

  std::string csv = "classifier,accuracy\n";
  csv += "random," + format_value(report.random_baseline) + "\n";
  if (report.centroid_baseline_accuracy) csv += "centroid," + format_value(*report.centroid_baseline_accuracy) + "\n";
  csv += "tstr," + format_value(report.tstr_accuracy) + "\n";
  csv += "trts," + format_value(report.trts_accuracy) + "\n";
  if (ablation) {
    csv += "tstr_epoch0," + format_value(ablation->tstr_accuracy) + "\n";
    csv += "trts_epoch0," + format_value(ablation->trts_accuracy) + "\n";
  }
  persist::write_text(dir / "tstr.csv", csv);

  m.add_outputs_under(cfg.paths.root, dir);
  write_manifest(dir, m);
  spdlog::info("evaluate: TSTR {:.3f} TRTS {:.3f} (random {:.3f}) -> {}", report.tstr_accuracy, report.trts_accuracy,
               report.random_baseline, dir.string());
}

}  // namespace hedge::cli
