#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hedge/eval.hpp"
#include "hedge/prep.hpp"

using namespace hedge;
using namespace hedge::eval;

TEST(PercentileBands, IdenticalProfiles) {
  const std::vector<std::vector<double>> pop(5, {0.1, 0.7, 0.2});
  const auto b = percentile_bands(pop);
  for (const auto& s : b.series) EXPECT_EQ(s, pop[0]);
}

TEST(PercentileBands, ZeroAndOneVectors) {
  const std::vector<std::vector<double>> pop{std::vector<double>(4, 0.0), std::vector<double>(4, 1.0)};
  const auto b = percentile_bands(pop);
  EXPECT_EQ(b.p50(), std::vector<double>(4, 0.5));
  EXPECT_EQ(b.mean(), std::vector<double>(4, 0.5));
  EXPECT_THROW(percentile_bands(std::vector<std::vector<double>>{{1.0}}), InvalidArgument);
}

TEST(PercentileBands, MonotoneAcrossLevels) {
  Rng rng(1);
  std::vector<std::vector<double>> pop(37, std::vector<double>(24));
  for (auto& p : pop)
    for (double& x : p) x = rng.normal();
  const auto b = percentile_bands(pop);
  for (std::size_t t = 0; t < 24; ++t)
    for (std::size_t k = 1; k < 5; ++k) EXPECT_LE(b.series[k - 1][t], b.series[k][t]);
}

TEST(PercentileBands, CsvLayout) {
  const std::vector<std::vector<double>> pop{{0.0, 1.0}, {1.0, 3.0}};
  std::ostringstream out;
  write_bands_csv(out, percentile_bands(pop));
  EXPECT_EQ(out.str(), "t,p10,p25,p50,p75,p90,mean\n0,0.1,0.25,0.5,0.75,0.9,0.5\n1,1.2,1.5,2,2.5,2.8,2\n");
}

TEST(BandCoverage, CountsInclusiveBounds) {
  const std::vector<double> lo{0, 0, 0, 0}, hi{1, 1, 1, 1}, v{0, 0.5, 1, 2};
  EXPECT_DOUBLE_EQ(band_coverage(lo, hi, v), 0.75);
}

TEST(StratifiedSplit, DisjointCompleteAndStratified) {
  std::vector<int> labels;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 10 * (c + 1); ++i) labels.push_back(c);
  labels.push_back(7);
  Rng rng(2);
  const auto s = stratified_split(labels, 0.8, rng);
  std::set<std::size_t> train(s.train.begin(), s.train.end()), test(s.test.begin(), s.test.end());
  EXPECT_EQ(train.size() + test.size(), labels.size());
  for (std::size_t i : train) EXPECT_FALSE(test.contains(i));
  std::map<int, int> per_label;
  for (std::size_t i : s.train) ++per_label[labels[i]];
  EXPECT_EQ(per_label[0], 8);
  EXPECT_EQ(per_label[1], 16);
  EXPECT_EQ(per_label[2], 24);
  Rng again(2);
  EXPECT_EQ(stratified_split(labels, 0.8, again).train, s.train);
}

TEST(Evaluate, RejectsASingleCluster) {
  const auto data = fixture::separable_profiles(1, 30, 12, 3);
  EXPECT_THROW(evaluate(data.profiles, data.labels, EvalConfig{}), InvalidArgument);
}

TEST(Evaluate, ExcludesTinyClusters) {
  auto data = fixture::separable_profiles(3, 20, 12, 3);
  data.profiles.resize(44);  // cluster 2 keeps 4 profiles
  data.labels.resize(44);
  EvalConfig cfg;
  cfg.repetitions = 1;
  cfg.gan.n_epochs = 1;
  cfg.gan.noise_dim = 4;
  cfg.gan.generator_hidden = {8};
  cfg.gan.discriminator_hidden = {8};
  cfg.classifier.epochs = 2;
  const auto r = evaluate(data.profiles, data.labels, cfg);
  EXPECT_EQ(r.clusters, (std::vector<int>{0, 1}));
  EXPECT_EQ(r.excluded_clusters, (std::vector<int>{2}));
  EXPECT_DOUBLE_EQ(r.random_baseline, 0.5);
}

TEST(Evaluate, RandomBaselineForFourClusters) {
  const auto data = fixture::separable_profiles(4, 10, 12, 3);
  EvalConfig cfg;
  cfg.repetitions = 1;
  cfg.gan.n_epochs = 0;
  cfg.classifier.epochs = 1;
  EXPECT_DOUBLE_EQ(evaluate(data.profiles, data.labels, cfg).random_baseline, 0.25);
  EXPECT_EQ(EvalConfig{}.repetitions, 10);
}

TEST(Evaluate, SeparableClustersAreLearnedAndReproducible) {
  const auto data = fixture::separable_profiles(3, 80, 24, 4);
  EvalConfig cfg;
  cfg.repetitions = 3;
  cfg.seed = 12;
  cfg.gan.n_epochs = 100;
  std::vector<std::vector<double>> centroids;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> mean(24, 0.0);
    for (std::size_t i = 0; i < data.profiles.size(); ++i)
      if (data.labels[i] == c)
        for (std::size_t t = 0; t < 24; ++t) mean[t] += data.profiles[i][t] / 80.0;
    centroids.push_back(mean);
  }
  const BaselineClassifier baseline = [&](const std::vector<double>& p) { return prep::nearest_centroid(centroids, p); };
  const auto r = evaluate(data.profiles, data.labels, cfg, baseline);
  EXPECT_EQ(r.tstr_per_repetition.size(), 3u);
  EXPECT_GE(r.tstr_accuracy, 0.9);
  EXPECT_GE(r.trts_accuracy, 0.9);
  ASSERT_TRUE(r.centroid_baseline_accuracy);
  EXPECT_GE(*r.centroid_baseline_accuracy, 0.9);
  for (double a : r.tstr_per_repetition) {
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 1.0);
  }
  const auto again = evaluate(data.profiles, data.labels, cfg, baseline);
  EXPECT_EQ(again.tstr_per_repetition, r.tstr_per_repetition);
  EXPECT_EQ(again.trts_per_repetition, r.trts_per_repetition);
}

TEST(Evaluate, UntrainedGansStayNearChance) {
  const auto data = fixture::separable_profiles(3, 80, 24, 5);
  EvalConfig cfg;
  // Each repetition relabels the classes at random (sd about 0.27 per repetition).
  cfg.repetitions = 30;
  cfg.seed = 13;
  cfg.gan.n_epochs = 0;
  const auto r = evaluate(data.profiles, data.labels, cfg);
  EXPECT_NEAR(r.tstr_accuracy, 1.0 / 3.0, 0.15);
  EXPECT_NEAR(r.trts_accuracy, 1.0 / 3.0, 0.15);
}

TEST(ProfileClassifier, LearnsSeparableProfiles) {
  const auto train = fixture::separable_profiles(4, 50, 24, 6);
  const auto test = fixture::separable_profiles(4, 20, 24, 7);
  ProfileClassifier clf(24, 4, ClassifierConfig{}, 1);
  clf.fit(train.profiles, train.labels);
  EXPECT_GE(clf.accuracy(test.profiles, test.labels), 0.95);
  EXPECT_THROW(ProfileClassifier(24, 1, ClassifierConfig{}, 1), InvalidArgument);
}

TEST(Bands, TrainedGanPopulationSitsInsideTheRealBands) {
  const auto real = fixture::corpus_cluster(500, 0, 60, 21);
  ASSERT_EQ(real.size(), 500u);
  gan::TrainConfig cfg;
  cfg.n_epochs = 1000;
  cfg.seed = 4;
  const auto trained = gan::train_gan(real, cfg);
  const auto bands = percentile_bands(real);
  const auto population = gan::sample_population(trained.weights, 500, 8);
  double inside = 0;
  for (const auto& p : population) inside += band_coverage(bands.p10(), bands.p90(), p) / 500.0;
  EXPECT_GE(inside, 0.8);
}
