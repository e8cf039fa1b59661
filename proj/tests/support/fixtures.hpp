#pragma once

#include <cstdint>
#include <vector>

#include "hedge/corpus.hpp"
#include "hedge/generator.hpp"
#include "hedge/ingest.hpp"
#include "hedge/types.hpp"

namespace fixture {

using Rows = std::vector<std::vector<double>>;

hedge::Date date(int y, unsigned m, unsigned d);

hedge::DayProfile day(std::vector<double> values, hedge::Date date = fixture::date(2013, 1, 7),
                      hedge::DataType type = hedge::DataType::load, const char* home = "h1");

struct Labelled {
  Rows profiles;
  std::vector<int> labels;
};

/// Unit-sum profiles built from k bumps placed far apart in the day, with
/// multiplicative log-normal noise of sd `noise`.
Labelled separable_profiles(int k, int per_cluster, int steps, std::uint64_t seed, double noise = 0.1);

hedge::ingest::ConsumptionFactors factors();

/// Parses the corpus CSVs and groups them per home.
hedge::ingest::RawCorpus parse(const hedge::corpus::RawCorpusFiles& files);

/// Hand-built chain artifacts for one non-month-grouped data type: the same
/// cluster matrix for all four day-type transitions, the same factor matrix,
/// and small untrained GANs for every (day type, cluster).
hedge::engine::DataTypeArtifacts chain_artifacts(hedge::DataType type, const Rows& cluster_probs,
                                                 const std::vector<double>& edges, const Rows& factor_probs,
                                                 int steps = 24, std::uint64_t seed = 5);

/// Unit-sum daily load profiles of one reference archetype (a single corpus
/// cluster), taken from the emitted meter CSV.
Rows corpus_cluster(int n_profiles, int archetype, int resolution_minutes, std::uint64_t seed);

/// Untrained generator weights with a small architecture.
hedge::gan::GanWeights tiny_gan(hedge::gan::GanKey key, int steps, std::uint64_t seed);

}  // namespace fixture
