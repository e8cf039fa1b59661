#include "config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace hedge::cli {

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// TOML-style values may be quoted and carry a trailing comment.
std::string clean_value(std::string v) {
  v = trim(std::move(v));
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    return v.substr(1, v.size() - 2);
  }
  for (const char* marker : {" #", " ;", "\t#", "\t;"}) {
    if (const auto pos = v.find(marker); pos != std::string::npos) v = trim(v.substr(0, pos));
  }
  return v;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

std::string format_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename Fn>
auto rethrow_as_config(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

struct Field {
  std::string key;
  std::function<void(const std::string&)> set;
  std::function<std::string()> get;
};

Field int_field(std::string key, int& ref) {
  return {key, [&ref, key](const std::string& t) { ref = parse_number<int>(key, t); },
          [&ref] { return std::to_string(ref); }};
}

Field u64_field(std::string key, std::uint64_t& ref) {
  return {key, [&ref, key](const std::string& t) { ref = parse_number<std::uint64_t>(key, t); },
          [&ref] { return std::to_string(ref); }};
}

Field real_field(std::string key, double& ref) {
  return {key, [&ref, key](const std::string& t) { ref = parse_number<double>(key, t); },
          [&ref] { return format_real(ref); }};
}

Field bool_field(std::string key, bool& ref) {
  return {key, [&ref, key](const std::string& t) { ref = parse_bool(key, t); },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

Field path_field(std::string key, fs::path& ref) {
  return {key,
          [&ref, key](const std::string& t) {
            if (t.empty()) throw ConfigError(key, "must not be empty");
            ref = t;
          },
          [&ref] { return ref.generic_string(); }};
}

Field date_field(std::string key, Date& ref) {
  return {key,
          [&ref, key](const std::string& t) {
            const auto d = parse_date(t);
            if (!d) throw ConfigError(key, "expected YYYY-MM-DD, got '" + t + "'");
            ref = *d;
          },
          [&ref] { return format_date(ref); }};
}

template <typename E, typename Parse>
Field enum_field(std::string key, E& ref, Parse parse) {
  return {key, [&ref, key, parse](const std::string& t) { ref = rethrow_as_config(key, [&] { return parse(t); }); },
          [&ref] { return std::string(to_string(ref)); }};
}

Field data_types_field(std::string key, std::vector<DataType>& ref) {
  return {key,
          [&ref, key](const std::string& t) {
            std::vector<DataType> out;
            std::stringstream ss(t);
            std::string item;
            while (std::getline(ss, item, ',')) {
              item = trim(item);
              const auto type = rethrow_as_config(key, [&] { return parse_data_type(item); });
              if (std::find(out.begin(), out.end(), type) != out.end()) throw ConfigError(key, "duplicate " + item);
              out.push_back(type);
            }
            if (out.empty()) throw ConfigError(key, "must list at least one data type");
            ref = std::move(out);
          },
          [&ref] {
            std::string s;
            for (DataType t : ref) s += (s.empty() ? "" : ",") + std::string(to_string(t));
            return s;
          }};
}

std::vector<Field> fields(RunConfig& c) {
  auto& p = c.prepare;
  auto& g = c.train.gan;
  return {
      u64_field("seed", c.seed),
      path_field("paths.data_dir", c.paths.data_dir),
      path_field("paths.artifact_dir", c.paths.artifact_dir),
      path_field("paths.output_dir", c.paths.output_dir),

      int_field("corpus.n_homes", c.corpus.n_homes),
      int_field("corpus.n_days", c.corpus.n_days),
      int_field("corpus.resolution_minutes", c.corpus.resolution_minutes),
      date_field("corpus.start_date", c.corpus.start_date),
      real_field("corpus.single_missing", c.corpus.single_missing),
      real_field("corpus.multi_gap_days", c.corpus.multi_gap_days),
      real_field("corpus.invalid_range_homes", c.corpus.invalid_range_homes),
      real_field("corpus.rural_fraction", c.corpus.rural_fraction),

      int_field("prepare.resolution_minutes", p.resolution_minutes),
      int_field("prepare.n_segments", p.n_segments),
      real_field("prepare.max_malformed_fraction", c.max_malformed_fraction),
      enum_field("prepare.fill_method", p.fill_method, [](const std::string& t) { return prep::parse_fill_method(t); }),
      int_field("prepare.m", p.factor_bins),
      int_field("prepare.kmeans_restarts", p.kmeans_restarts),
      int_field("prepare.kmeans_max_iter", p.kmeans_max_iter),
      real_field("prepare.fill_mask_fraction", p.fill_mask_fraction),
      real_field("prepare.motorway_threshold_miles", p.factors.motorway_threshold_miles),
      real_field("prepare.max_hourly_kwh", p.factors.max_hourly_kwh),
      real_field("prepare.max_daily_kwh", p.factors.max_daily_kwh),
      int_field("clusters.load", p.load_clusters),
      int_field("clusters.ev", p.ev_clusters),
      real_field("factors.urban", p.factors.urban),
      real_field("factors.rural", p.factors.rural),
      real_field("factors.motorway", p.factors.motorway),

      int_field("train.n_epochs", g.n_epochs),
      int_field("train.batch_size", g.batch_size),
      int_field("train.population", g.population),
      real_field("train.lr_initial", g.lr_initial),
      real_field("train.lr_final", g.lr_final),
      real_field("train.noise_initial", g.noise_initial),
      real_field("train.noise_final", g.noise_final),
      real_field("train.sum_weight", g.sum_weight),
      real_field("train.percentile_weight", g.percentile_weight),
      real_field("train.dropout_generator", g.dropout_generator),
      real_field("train.dropout_discriminator", g.dropout_discriminator),
      int_field("train.noise_dim", g.noise_dim),
      int_field("train.max_profiles_per_cluster", c.train.max_profiles_per_cluster),
      int_field("train.min_profiles", c.train.min_profiles),

      int_field("generate.n_homes", c.generate.n_homes),
      int_field("generate.n_days", c.generate.n_days),
      date_field("generate.start_date", c.generate.start_date),
      data_types_field("generate.data_types", c.generate.data_types),
      real_field("generate.ev_driving_threshold", c.generate.ev_driving_threshold),

      enum_field("evaluate.data_type", c.evaluate.data_type, [](const std::string& t) { return parse_data_type(t); }),
      enum_field("evaluate.day_type", c.evaluate.day_type, [](const std::string& t) { return parse_day_type(t); }),
      int_field("evaluate.repetitions", c.evaluate.repetitions),
      int_field("evaluate.n_epochs", c.evaluate.n_epochs),
      int_field("evaluate.max_profiles_per_cluster", c.evaluate.max_profiles_per_cluster),
      int_field("evaluate.classifier_epochs", c.evaluate.classifier_epochs),
      int_field("evaluate.band_population", c.evaluate.band_population),
      bool_field("evaluate.ablation", c.evaluate.ablation),
  };
}

void apply(RunConfig& c, const std::string& key, const std::string& value) {
  for (auto& f : fields(c)) {
    if (f.key == key) {
      f.set(value);
      return;
    }
  }
  throw ConfigError(key, "unknown configuration key");
}

// Module validators name their own fields; map them onto config keys.
std::string config_key(const std::string& prefix, const std::string& field) {
  if (field.find('.') != std::string::npos) return field;
  if (field == "urban" || field == "rural" || field == "motorway") return "factors." + field;
  return prefix + "." + field;
}

template <typename Fn>
void validate_section(const std::string& prefix, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    const auto colon = what.find(": ");
    throw ConfigError(config_key(prefix, e.field()), colon == std::string::npos ? what : what.substr(colon + 2));
  }
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
}

void require_fraction(const std::string& key, double v) {
  if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(key, "must lie in [0, 1]");
}

}  // namespace

std::map<std::string, std::string> RunConfig::entries() const {
  RunConfig copy = *this;
  std::map<std::string, std::string> out;
  for (const auto& f : fields(copy)) out[f.key] = f.get();
  return out;
}

std::string RunConfig::canonical_text() const {
  std::string text;
  for (const auto& [k, v] : entries()) text += k + " = " + v + "\n";
  return text;
}

void RunConfig::validate() const {
  require_positive("corpus.n_homes", corpus.n_homes);
  require_positive("corpus.n_days", corpus.n_days);
  validate_section("corpus", [&] { steps_per_day(corpus.resolution_minutes); });
  require_fraction("corpus.single_missing", corpus.single_missing);
  require_fraction("corpus.multi_gap_days", corpus.multi_gap_days);
  require_fraction("corpus.invalid_range_homes", corpus.invalid_range_homes);
  require_fraction("corpus.rural_fraction", corpus.rural_fraction);
  require_fraction("prepare.max_malformed_fraction", max_malformed_fraction);

  validate_section("prepare", [&] {
    pipeline::PrepareConfig probe = prepare;
    // Factors are checked separately by commands that need them.
    probe.factors = {1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    probe.validate();
  });
  if (!(prepare.factors.motorway_threshold_miles > 0.0)) {
    throw ConfigError("prepare.motorway_threshold_miles", "must be positive");
  }
  validate_section("train", [&] { train.gan.validate(); });
  if (train.max_profiles_per_cluster < 0) throw ConfigError("train.max_profiles_per_cluster", "must be nonnegative");
  if (train.min_profiles < 2) throw ConfigError("train.min_profiles", "must be at least 2");

  require_positive("generate.n_homes", generate.n_homes);
  require_positive("generate.n_days", generate.n_days);
  if (!(generate.ev_driving_threshold >= 0.0 && generate.ev_driving_threshold < 1.0)) {
    throw ConfigError("generate.ev_driving_threshold", "must lie in [0, 1)");
  }

  if (evaluate.repetitions < 1) throw ConfigError("evaluate.repetitions", "must be at least 1");
  if (evaluate.n_epochs < 0) throw ConfigError("evaluate.n_epochs", "must be nonnegative");
  if (evaluate.max_profiles_per_cluster < 0) {
    throw ConfigError("evaluate.max_profiles_per_cluster", "must be nonnegative");
  }
  if (evaluate.classifier_epochs < 1) throw ConfigError("evaluate.classifier_epochs", "must be at least 1");
  if (evaluate.band_population < 2) throw ConfigError("evaluate.band_population", "must be at least 2");
  if (evaluate.data_type == DataType::pv) {
    throw ConfigError("evaluate.data_type", "pv is month-grouped and has no behaviour clusters to classify");
  }
}

void RunConfig::require_factors() const {
  const auto& f = prepare.factors;
  for (const auto& [key, v] : {std::pair{"factors.urban", f.urban}, std::pair{"factors.rural", f.rural},
                               std::pair{"factors.motorway", f.motorway},
                               std::pair{"prepare.max_hourly_kwh", f.max_hourly_kwh},
                               std::pair{"prepare.max_daily_kwh", f.max_daily_kwh}}) {
    if (v == 0.0) throw ConfigError(key, "required (no default)");
    require_positive(key, v);
  }
}

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError(text, "override must have the form key=value");
  Override o{trim(text.substr(0, eq)), clean_value(text.substr(eq + 1))};
  if (o.first.empty()) throw ConfigError(text, "override key is empty");
  return o;
}

RunConfig config_from_text(const std::string& ini_text, const std::vector<Override>& overrides) {
  namespace pt = boost::property_tree;
  RunConfig cfg;
  pt::ptree tree;
  std::istringstream in(ini_text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config", "line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      apply(cfg, name, clean_value(node.data()));
      continue;
    }
    for (const auto& [key, leaf] : node) {
      if (!leaf.empty()) throw ConfigError(name + "." + key, "nested sections are not supported");
      apply(cfg, name + "." + key, clean_value(leaf.data()));
    }
  }
  for (const auto& [key, value] : overrides) apply(cfg, key, value);
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::optional<fs::path>& file, const std::vector<Override>& overrides) {
  std::string text;
  if (file) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw ConfigError("--config", "cannot read " + file->string());
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return config_from_text(text, overrides);
}

}  // namespace hedge::cli
