#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hedge/generator.hpp"
#include "hedge/pipeline.hpp"
#include "hedge/types.hpp"

namespace hedge::cli {

namespace fs = std::filesystem;

/// Invalid configuration; the message starts with the offending key path.
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

struct Paths {
  fs::path root = ".";
  fs::path data_dir = "data";
  fs::path artifact_dir = "artifacts";
  fs::path output_dir = "output";

  [[nodiscard]] fs::path data() const { return resolve(data_dir); }
  [[nodiscard]] fs::path artifacts() const { return resolve(artifact_dir); }
  [[nodiscard]] fs::path output() const { return resolve(output_dir); }
  [[nodiscard]] fs::path resolve(const fs::path& p) const { return p.is_absolute() ? p : root / p; }
};

struct CorpusSection {
  int n_homes = 200;
  int n_days = 60;
  int resolution_minutes = 30;
  Date start_date = Date{std::chrono::year{2013} / 1 / 1};
  double single_missing = 0.0;
  double multi_gap_days = 0.0;
  double invalid_range_homes = 0.0;
  double rural_fraction = 0.3;
};

struct GenerateSection {
  int n_homes = 10;
  int n_days = 14;
  Date start_date = Date{std::chrono::year{2013} / 1 / 7};
  std::vector<DataType> data_types{DataType::load, DataType::pv, DataType::ev};
  double ev_driving_threshold = engine::kDrivingThreshold;
};

struct EvaluateSection {
  DataType data_type = DataType::load;
  DayType day_type = DayType::weekday;
  int repetitions = 10;
  int n_epochs = 200;
  int max_profiles_per_cluster = 500;
  int classifier_epochs = 100;
  int band_population = 500;
  bool ablation = true;
};

struct RunConfig {
  std::uint64_t seed = 1;
  Paths paths;
  CorpusSection corpus;
  double max_malformed_fraction = 0.05;
  pipeline::PrepareConfig prepare;
  pipeline::TrainOptions train;
  GenerateSection generate;
  EvaluateSection evaluate;

  /// Effective configuration as sorted `key = value` lines (INI sections
  /// flattened to dotted keys). Feeding it back reproduces this config.
  [[nodiscard]] std::map<std::string, std::string> entries() const;
  [[nodiscard]] std::string canonical_text() const;

  /// Range checks of every section; errors carry the config key path.
  void validate() const;
  /// Factors have no defaults; only commands that ingest trips need them.
  void require_factors() const;
};

using Override = std::pair<std::string, std::string>;

/// Parses `key=value`; the key must be nonempty.
Override parse_override(const std::string& text);

/// Defaults, then the INI file, then overrides in order. Unknown keys and
/// unparsable values are rejected with their key path.
RunConfig load_config(const std::optional<fs::path>& file, const std::vector<Override>& overrides);

/// Same, from INI text.
RunConfig config_from_text(const std::string& ini_text, const std::vector<Override>& overrides);

}  // namespace hedge::cli
