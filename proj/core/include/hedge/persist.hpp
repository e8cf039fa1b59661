#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hedge/gan.hpp"
#include "hedge/generator.hpp"
#include "hedge/pipeline.hpp"
#include "hedge/prep.hpp"
#include "hedge/transitions.hpp"

namespace hedge::persist {

namespace fs = std::filesystem;

// JSON documents ---------------------------------------------------------------

std::string to_json(const prep::ClusterModel& model);
prep::ClusterModel cluster_model_from_json(std::string_view text);

std::string to_json(const gan::GanWeights& weights);
gan::GanWeights gan_weights_from_json(std::string_view text);

/// Everything estimated for one (data_type, day-type transition).
struct TransitionsDoc {
  transitions::FactorTransitionMatrix factors;
  std::optional<transitions::ClusterTransitionMatrix> clusters;  // absent for month-grouped data
  std::vector<double> factor_marginal;
};

std::string to_json(const TransitionsDoc& doc);
TransitionsDoc transitions_from_json(std::string_view text);

// Prepared profiles ------------------------------------------------------------

/// `home_id,date,cluster,factor,zero_day,v0..v{T-1}`, values with 17 significant digits.
void write_prepared_days(std::ostream& out, std::span<const pipeline::PreparedDay> days, int steps);
std::vector<pipeline::PreparedDay> read_prepared_days(std::istream& in, DataType type);

// Artifact tree ----------------------------------------------------------------

struct ArtifactLayout {
  fs::path root;

  [[nodiscard]] fs::path gan(const gan::GanKey& key) const;
  [[nodiscard]] fs::path transitions(DataType type, DayTransition key) const;
  [[nodiscard]] fs::path clusters(DataType type, DayType day) const;
  [[nodiscard]] fs::path profiles(DataType type) const;
};

/// Writes `content` atomically enough for a single writer, creating parent directories.
void write_text(const fs::path& path, std::string_view content);
/// Throws MissingArtifact naming the path when it does not exist.
std::string read_text(const fs::path& path);

void save_prepared(const pipeline::PreparedData& data, const ArtifactLayout& layout);
/// Prepared days and matrices of every data type present under the layout.
pipeline::PreparedData load_prepared(const ArtifactLayout& layout);

void save_gan(const gan::GanWeights& weights, const ArtifactLayout& layout);

/// Matrices, cluster models and (optionally) every GAN file of one data type.
engine::DataTypeArtifacts load_artifacts(const ArtifactLayout& layout, DataType type, bool with_gans);

}  // namespace hedge::persist
