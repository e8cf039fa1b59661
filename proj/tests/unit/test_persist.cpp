#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hedge/corpus.hpp"
#include "hedge/persist.hpp"

using namespace hedge;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("hedge_persist_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

pipeline::PreparedData small_prepared() {
  pipeline::PrepareConfig cfg;
  cfg.factors = fixture::factors();
  cfg.factor_bins = 8;
  cfg.kmeans_restarts = 2;
  cfg.seed = 3;
  return pipeline::prepare(fixture::parse(corpus::synth_corpus(corpus::reference_spec(8, 10, 60, 13))), cfg);
}

}  // namespace

TEST(PersistJson, ClusterModelRoundTrip) {
  prep::ClusterModel m;
  m.data_type = DataType::ev;
  m.day_type = DayType::weekend;
  m.k = 2;
  m.feature_spec = prep::FeatureSpec::ev_features;
  m.centroids = {{0.1, 1.0 / 3.0, 7.0}, {2.5e-17, 0.0, 1e300}};
  m.no_travel_cluster = 2;
  EXPECT_EQ(persist::cluster_model_from_json(persist::to_json(m)), m);
}

TEST(PersistJson, GanWeightsRoundTripBitExact) {
  const auto w = fixture::tiny_gan({DataType::pv, DayType::weekday, 7}, 24, 99);
  const auto back = persist::gan_weights_from_json(persist::to_json(w));
  EXPECT_TRUE(back == w);
  EXPECT_EQ(persist::to_json(back), persist::to_json(w));
  Rng a(1), b(1);
  EXPECT_EQ(gan::sample_matrix(w, 3, a), gan::sample_matrix(back, 3, b));
}

TEST(PersistJson, TransitionsRoundTrip) {
  persist::TransitionsDoc doc;
  doc.factors.data_type = DataType::load;
  doc.factors.key = {DayType::weekday, DayType::weekend};
  doc.factors.bins.edges = {0.0, 1.0 / 3.0, 2.0};
  doc.factors.probs = {{0.25, 0.75}, {1.0, 0.0}};
  transitions::ClusterTransitionMatrix cm;
  cm.data_type = DataType::load;
  cm.key = doc.factors.key;
  cm.probs = {{0.1, 0.9}, {0.6, 0.4}};
  cm.initial_dist = {0.3, 0.7};
  doc.clusters = cm;
  doc.factor_marginal = {0.4, 0.6};
  const auto back = persist::transitions_from_json(persist::to_json(doc));
  EXPECT_EQ(back.factors, doc.factors);
  ASSERT_TRUE(back.clusters);
  EXPECT_EQ(*back.clusters, cm);
  EXPECT_EQ(back.factor_marginal, doc.factor_marginal);

  doc.clusters.reset();
  EXPECT_FALSE(persist::transitions_from_json(persist::to_json(doc)).clusters);
}

TEST(PersistJson, MalformedDocumentsAreDataErrors) {
  EXPECT_THROW(persist::cluster_model_from_json("{"), DataError);
  EXPECT_THROW(persist::gan_weights_from_json("{\"key\": 3}"), DataError);
  EXPECT_THROW(persist::transitions_from_json("[]"), DataError);
}

TEST(PersistCsv, PreparedDaysRoundTrip) {
  std::vector<pipeline::PreparedDay> days(2);
  days[0].home_id = "H1";
  days[0].date = fixture::date(2021, 3, 1);
  days[0].data_type = DataType::ev;
  days[0].profile.values = {0.1, 0.2, 0.7 - 1e-17};
  days[0].factor = 12.345678901234567;
  days[0].cluster = 1;
  days[1].home_id = "H2";
  days[1].date = fixture::date(2021, 3, 2);
  days[1].data_type = DataType::ev;
  days[1].profile.values = {0.0, 0.0, 0.0};
  days[1].profile.zero_day = true;
  days[1].cluster = 3;
  std::stringstream ss;
  persist::write_prepared_days(ss, days, 3);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "home_id,date,cluster,factor,zero_day,v0,v1,v2");
  const auto back = persist::read_prepared_days(ss, DataType::ev);
  ASSERT_EQ(back.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].home_id, days[i].home_id);
    EXPECT_EQ(back[i].date, days[i].date);
    EXPECT_EQ(back[i].profile.values, days[i].profile.values);
    EXPECT_EQ(back[i].profile.zero_day, days[i].profile.zero_day);
    EXPECT_EQ(back[i].factor, days[i].factor);
    EXPECT_EQ(back[i].cluster, days[i].cluster);
  }
}

TEST(PersistCsv, RejectsStepMismatchAndBadRows) {
  std::vector<pipeline::PreparedDay> days(1);
  days[0].profile.values = {1.0};
  std::stringstream ss;
  EXPECT_THROW(persist::write_prepared_days(ss, days, 2), InvalidArgument);
  std::istringstream bad("home_id,date,cluster,factor,zero_day,v0\nH,2021-01-01,0,1,0\n");
  try {
    persist::read_prepared_days(bad, DataType::load);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(PersistTree, SaveAndLoadPrepared) {
  TempDir tmp;
  const auto data = small_prepared();
  const persist::ArtifactLayout layout{tmp.path};
  persist::save_prepared(data, layout);
  EXPECT_TRUE(fs::exists(tmp.path / "load" / "transitions_weekday_weekend.json"));
  EXPECT_TRUE(fs::exists(tmp.path / "pv" / "clusters_weekend.json"));
  const auto back = persist::load_prepared(layout);
  EXPECT_EQ(back.steps, data.steps);
  ASSERT_EQ(back.days.size(), data.days.size());
  for (std::size_t i = 0; i < data.days.size(); ++i) {
    EXPECT_EQ(back.days[i].home_id, data.days[i].home_id);
    EXPECT_EQ(back.days[i].profile.values, data.days[i].profile.values);
  }
  for (const auto& [type, art] : data.artifacts) {
    const auto& b = back.artifacts.at(type);
    EXPECT_EQ(b.factor_matrices, art.factor_matrices);
    EXPECT_EQ(b.cluster_matrices, art.cluster_matrices);
    EXPECT_EQ(b.cluster_models, art.cluster_models);
    EXPECT_EQ(b.factor_marginal, art.factor_marginal);
  }
}

TEST(PersistTree, LoadArtifactsWithGans) {
  TempDir tmp;
  const persist::ArtifactLayout layout{tmp.path};
  const auto data = small_prepared();
  persist::save_prepared(data, layout);
  EXPECT_THROW(persist::load_artifacts(layout, DataType::load, true), MissingArtifact);
  const auto w = fixture::tiny_gan({DataType::load, DayType::weekend, 1}, data.steps, 4);
  persist::save_gan(w, layout);
  EXPECT_TRUE(fs::exists(tmp.path / "load" / "weekend" / "1" / "gan.json"));
  const auto art = persist::load_artifacts(layout, DataType::load, true);
  ASSERT_EQ(art.gans.size(), 1u);
  EXPECT_TRUE(art.gans.at(w.key) == w);
  EXPECT_EQ(art.steps, data.steps);
}

TEST(PersistTree, MissingFilesNameThePath) {
  TempDir tmp;
  const persist::ArtifactLayout layout{tmp.path};
  try {
    persist::read_text(layout.profiles(DataType::pv));
    FAIL();
  } catch (const MissingArtifact& e) {
    EXPECT_NE(e.key().find("profiles.csv"), std::string::npos);
  }
  EXPECT_THROW(persist::load_prepared(layout), MissingArtifact);
}
