#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hedge/corpus.hpp"
#include "hedge/pipeline.hpp"

using namespace hedge;
using namespace hedge::pipeline;

namespace {

PrepareConfig config(int resolution = 60) {
  PrepareConfig cfg;
  cfg.resolution_minutes = resolution;
  cfg.factors = fixture::factors();
  cfg.factor_bins = 10;
  cfg.kmeans_restarts = 3;
  cfg.seed = 5;
  return cfg;
}

bool has_run(const std::vector<int>& positions) {
  for (std::size_t i = 1; i < positions.size(); ++i)
    if (positions[i] == positions[i - 1] + 1) return true;
  return false;
}

struct Prepared {
  corpus::RawCorpusFiles files;
  PreparedData data;
};

Prepared prepared_corpus(corpus::DefectRates defects, int homes = 16, int days = 21) {
  auto spec = corpus::reference_spec(homes, days, 60, 31);
  spec.defects = defects;
  Prepared p{corpus::synth_corpus(spec), {}};
  p.data = prepare(fixture::parse(p.files), config());
  return p;
}

}  // namespace

TEST(Prepare, CleanCorpusKeepsEveryDay) {
  const auto p = prepared_corpus({});
  const auto& c = p.data.counters;
  EXPECT_EQ(c.homes_in, 16u);
  EXPECT_EQ(c.homes_unconfirmed + c.homes_inconsistent + c.homes_without_validity, 0u);
  EXPECT_EQ(c.days_discarded_gaps, 0u);
  EXPECT_EQ(c.days_filled, 0u);
  std::map<DataType, std::size_t> per_type;
  for (const auto& d : p.data.days) ++per_type[d.data_type];
  EXPECT_EQ(per_type[DataType::load], 16u * 21u);
  EXPECT_EQ(per_type[DataType::pv], 16u * 21u);
  EXPECT_EQ(per_type[DataType::ev], 16u * 21u);
  EXPECT_EQ(p.data.steps, 24);
}

TEST(Prepare, DefectsAreRepairedOrDiscardedAsLabelled) {
  const auto p = prepared_corpus({0.01, 0.15, 0.2});
  std::set<std::string> invalid;
  for (const auto& h : p.files.homes)
    if (h.invalid_range) invalid.insert(h.home_id);
  EXPECT_EQ(p.data.counters.homes_unconfirmed, invalid.size());

  std::size_t discard = 0, filled = 0;
  for (const auto& l : p.files.labels) {
    if (l.data_type == DataType::ev || invalid.contains(l.home_id)) continue;
    if (has_run(l.defect_positions)) {
      ++discard;
    } else if (!l.defect_positions.empty()) {
      ++filled;
    }
  }
  EXPECT_GT(discard, 0u);
  EXPECT_EQ(p.data.counters.days_discarded_gaps, discard);
  EXPECT_EQ(p.data.counters.days_filled, filled);
  for (const auto& d : p.data.days) EXPECT_FALSE(invalid.contains(d.home_id));
}

TEST(Prepare, ProfilesAreNormalisedAndClustered) {
  const auto p = prepared_corpus({});
  for (const auto& d : p.data.days) {
    ASSERT_EQ(d.profile.values.size(), 24u);
    if (d.profile.zero_day) {
      EXPECT_EQ(d.factor, 0.0);
      continue;
    }
    EXPECT_NEAR(std::accumulate(d.profile.values.begin(), d.profile.values.end(), 0.0), 1.0, 1e-9);
    const auto& model = p.data.artifacts.at(d.data_type).cluster_models.at(d.day_type());
    if (d.data_type == DataType::pv) {
      EXPECT_EQ(d.cluster, static_cast<int>(month_of(d.date)));
    } else {
      EXPECT_GE(d.cluster, 0);
      EXPECT_LT(d.cluster, model.k);
    }
  }
  const auto& ev = p.data.artifacts.at(DataType::ev);
  EXPECT_EQ(ev.no_travel_cluster(), 3);
  EXPECT_EQ(ev.cluster_matrix({}).k(), 4);
  ASSERT_TRUE(p.data.fill_report);
}

TEST(Prepare, TransitionTablesAreStochastic) {
  const auto p = prepared_corpus({});
  for (const auto& [type, art] : p.data.artifacts) {
    for (const auto& [key, m] : art.factor_matrices) EXPECT_NO_THROW(transitions::check_stochastic(m.probs, "f"));
    for (const auto& [key, m] : art.cluster_matrices) {
      EXPECT_NO_THROW(transitions::check_stochastic(m.probs, "c"));
      EXPECT_NEAR(std::accumulate(m.initial_dist.begin(), m.initial_dist.end(), 0.0), 1.0, 1e-9);
    }
    EXPECT_NEAR(std::accumulate(art.factor_marginal.begin(), art.factor_marginal.end(), 0.0), 1.0, 1e-9);
    EXPECT_EQ(art.month_grouped(), type == DataType::pv);
  }
}

TEST(Prepare, SegmentCountDoesNotChangeTheResult) {
  const auto files = corpus::synth_corpus(corpus::reference_spec(12, 10, 60, 8));
  const auto raw = fixture::parse(files);
  auto one = config(), many = config();
  one.n_segments = 1;
  many.n_segments = 5;
  const auto a = prepare(raw, one), b = prepare(raw, many);
  ASSERT_EQ(a.days.size(), b.days.size());
  for (std::size_t i = 0; i < a.days.size(); ++i) {
    EXPECT_EQ(a.days[i].profile.values, b.days[i].profile.values);
    EXPECT_EQ(a.days[i].cluster, b.days[i].cluster);
  }
  EXPECT_EQ(a.artifacts.at(DataType::load).factor_matrices, b.artifacts.at(DataType::load).factor_matrices);
}

TEST(Prepare, ValidatesConfiguration) {
  auto cfg = config();
  cfg.factors = {};
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = config();
  cfg.resolution_minutes = 7;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = config();
  cfg.fill_mask_fraction = 0.5;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(ProcessHome, MissingValidityDiscardsTheHome) {
  const auto raw = fixture::parse(corpus::synth_corpus(corpus::reference_spec(1, 3, 60, 2)));
  auto home = raw.homes.front();
  home.validity.reset();
  const auto out = process_home(home, config());
  EXPECT_TRUE(out.load.empty());
  EXPECT_TRUE(out.ev.empty());
  EXPECT_EQ(out.counters.homes_without_validity, 1u);
  auto relaxed = config();
  relaxed.validity_supplied = false;
  EXPECT_EQ(process_home(home, relaxed).load.size(), 3u);
}

TEST(TrainAll, OneGanPerKeyCoveringTheChain) {
  const auto p = prepared_corpus({}, 12, 14);
  TrainOptions opts;
  opts.gan.n_epochs = 2;
  opts.gan.noise_dim = 4;
  opts.gan.generator_hidden = {8};
  opts.gan.discriminator_hidden = {8};
  opts.max_profiles_per_cluster = 30;
  const auto trained = train_all(p.data, opts);
  std::set<gan::GanKey> keys;
  for (const auto& t : trained) {
    EXPECT_TRUE(keys.insert(t.key).second);
    EXPECT_LE(t.profiles, 30u);
    EXPECT_EQ(t.result.trace.size(), 2u);
    if (t.key.data_type == DataType::ev) {
      EXPECT_NE(t.key.cluster, 3);
    }
  }
  auto art = p.data.artifacts.at(DataType::load);
  for (const auto& t : trained)
    if (t.key.data_type == DataType::load) art.gans.emplace(t.key, t.result.weights);
  EXPECT_NO_THROW(art.check_complete());
  const auto again = train_all(p.data, opts);
  ASSERT_EQ(again.size(), trained.size());
  for (std::size_t i = 0; i < again.size(); ++i) EXPECT_TRUE(again[i].result.weights == trained[i].result.weights);
}
