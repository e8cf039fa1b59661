#include "hedge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

namespace hedge::eval {

stats::Bands percentile_bands(std::span<const std::vector<double>> profiles) {
  if (profiles.size() < 2) throw InvalidArgument("population", "need at least 2 profiles");
  return stats::population_bands(profiles);
}

void write_bands_csv(std::ostream& out, const stats::Bands& bands) {
  out << "t,p10,p25,p50,p75,p90,mean\n";
  char buf[32];
  for (std::size_t t = 0; t < bands.steps(); ++t) {
    out << t;
    for (const auto& series : bands.series) {
      std::snprintf(buf, sizeof buf, "%.10g", series[t]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

double band_coverage(std::span<const double> lo, std::span<const double> hi, std::span<const double> values) {
  if (lo.size() != values.size() || hi.size() != values.size()) throw InvalidArgument("values", "length mismatch");
  if (values.empty()) return 0.0;
  std::size_t inside = 0;
  for (std::size_t t = 0; t < values.size(); ++t) {
    if (values[t] >= lo[t] && values[t] <= hi[t]) ++inside;
  }
  return static_cast<double>(inside) / static_cast<double>(values.size());
}

Split stratified_split(std::span<const int> labels, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw InvalidArgument("train_fraction", "must lie in (0, 1)");
  std::map<int, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labels.size(); ++i) by_label[labels[i]].push_back(i);
  Split split;
  for (auto& [label, idx] : by_label) {
    rng.shuffle(idx.begin(), idx.end());
    auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(idx.size())));
    if (idx.size() >= 2) n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.insert(split.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

ProfileClassifier::ProfileClassifier(int steps, int classes, const ClassifierConfig& cfg, std::uint64_t seed)
    : steps_(steps),
      classes_(classes),
      cfg_(cfg),
      seed_(seed),
      net_({steps, cfg.hidden, classes}, neural::Activation::relu, neural::Activation::softmax, 0.0) {
  if (classes < 2) throw InvalidArgument("classes", "need at least 2 classes");
  Rng init(derive_seed(seed, "classifier-init"));
  net_.initialise(init);
}

neural::Matrix ProfileClassifier::to_matrix(std::span<const std::vector<double>> profiles) const {
  neural::Matrix x(steps_, static_cast<Eigen::Index>(profiles.size()));
  for (std::size_t j = 0; j < profiles.size(); ++j) {
    if (profiles[j].size() != static_cast<std::size_t>(steps_)) throw InvalidArgument("profiles", "length mismatch");
    for (int t = 0; t < steps_; ++t) {
      x(t, static_cast<Eigen::Index>(j)) = profiles[j][static_cast<std::size_t>(t)] * steps_;
    }
  }
  return x;
}

void ProfileClassifier::fit(std::span<const std::vector<double>> profiles, std::span<const int> labels) {
  if (profiles.size() != labels.size()) throw InvalidArgument("labels", "count mismatch");
  if (profiles.empty()) throw InvalidArgument("profiles", "nothing to fit");
  const neural::Matrix x = to_matrix(profiles);
  neural::Adam opt(net_);
  Rng rng(derive_seed(seed_, "classifier-batches"));
  std::vector<Eigen::Index> order(profiles.size());
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  neural::ForwardCache cache;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    rng.shuffle(order.begin(), order.end());
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg_.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg_.batch_size));
      neural::Matrix xb(steps_, static_cast<Eigen::Index>(end - start));
      std::vector<int> yb;
      for (std::size_t i = start; i < end; ++i) {
        xb.col(static_cast<Eigen::Index>(i - start)) = x.col(order[i]);
        yb.push_back(labels[static_cast<std::size_t>(order[i])]);
      }
      const neural::Matrix probs = net_.forward(xb, cache, nullptr);
      neural::Matrix grad;
      neural::cross_entropy(probs, yb, &grad);
      opt.step(net_, net_.backward(cache, grad), cfg_.learning_rate);
    }
  }
}

int ProfileClassifier::predict(std::span<const double> profile) const {
  const std::vector<double> p(profile.begin(), profile.end());
  const neural::Matrix probs = net_.predict(to_matrix({&p, 1}));
  Eigen::Index best = 0;
  probs.col(0).maxCoeff(&best);
  return static_cast<int>(best);
}

double ProfileClassifier::accuracy(std::span<const std::vector<double>> profiles, std::span<const int> labels) const {
  if (profiles.size() != labels.size()) throw InvalidArgument("labels", "count mismatch");
  if (profiles.empty()) return 0.0;
  const neural::Matrix probs = net_.predict(to_matrix(profiles));
  std::size_t correct = 0;
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    Eigen::Index best = 0;
    probs.col(j).maxCoeff(&best);
    if (static_cast<int>(best) == labels[static_cast<std::size_t>(j)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(profiles.size());
}

namespace {

std::vector<double> unit_sum(std::vector<double> v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  if (s > 0.0) {
    for (double& x : v) x /= s;
  }
  return v;
}

}  // namespace

EvalReport evaluate(std::span<const std::vector<double>> profiles, std::span<const int> labels, const EvalConfig& cfg,
                    const BaselineClassifier& baseline) {
  if (profiles.size() != labels.size()) throw InvalidArgument("labels", "count mismatch");
  if (cfg.repetitions < 1) throw InvalidArgument("repetitions", "must be positive");
  cfg.gan.validate();

  EvalReport report;
  std::map<int, std::size_t> counts;
  for (int l : labels) ++counts[l];
  for (const auto& [label, n] : counts) {
    (n < static_cast<std::size_t>(cfg.min_cluster_size) ? report.excluded_clusters : report.clusters).push_back(label);
  }
  if (report.clusters.size() < 2) throw InvalidArgument("labels", "need at least 2 clusters with enough profiles");
  std::map<int, int> class_of;
  for (std::size_t i = 0; i < report.clusters.size(); ++i) class_of[report.clusters[i]] = static_cast<int>(i);
  const int k = static_cast<int>(report.clusters.size());
  report.random_baseline = 1.0 / k;

  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  std::vector<int> original;
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const auto it = class_of.find(labels[i]);
    if (it == class_of.end()) continue;
    xs.push_back(profiles[i]);
    ys.push_back(it->second);
    original.push_back(labels[i]);
  }
  const int steps = static_cast<int>(xs.front().size());

  if (baseline) {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) correct += baseline(xs[i]) == original[i] ? 1 : 0;
    report.centroid_baseline_accuracy = static_cast<double>(correct) / static_cast<double>(xs.size());
  }

  report.repetitions = cfg.repetitions;
  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const std::uint64_t rep_seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(rep));
    Rng split_rng(derive_seed(rep_seed, "split"));
    const Split split = stratified_split(ys, cfg.train_fraction, split_rng);

    std::vector<std::vector<double>> test_x;
    std::vector<int> test_y;
    for (std::size_t i : split.test) {
      test_x.push_back(xs[i]);
      test_y.push_back(ys[i]);
    }

    std::vector<int> train_counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i : split.train) ++train_counts[static_cast<std::size_t>(ys[i])];
    const int per_cluster = cfg.synthetic_per_cluster > 0
                                ? cfg.synthetic_per_cluster
                                : *std::max_element(train_counts.begin(), train_counts.end());

    std::vector<std::vector<double>> synth_x;
    std::vector<int> synth_y;
    for (int c = 0; c < k; ++c) {
      std::vector<std::vector<double>> train_c;
      for (std::size_t i : split.train) {
        if (ys[i] == c) train_c.push_back(xs[i]);
      }
      gan::TrainConfig gcfg = cfg.gan;
      gcfg.seed = derive_seed(rep_seed, static_cast<std::uint64_t>(100 + c));
      gcfg.population = std::min<int>(gcfg.population, static_cast<int>(train_c.size()));
      gcfg.batch_size = std::min<int>(gcfg.batch_size, static_cast<int>(train_c.size()));
      const auto trained = gan::train_gan(train_c, gcfg, {DataType::load, DayType::weekday, c});
      auto synth = gan::sample_population(trained.weights, per_cluster,
                                          derive_seed(rep_seed, static_cast<std::uint64_t>(200 + c)));
      for (auto& s : synth) {
        synth_x.push_back(unit_sum(std::move(s)));
        synth_y.push_back(c);
      }
    }

    ProfileClassifier on_synth(steps, k, cfg.classifier, derive_seed(rep_seed, "tstr"));
    on_synth.fit(synth_x, synth_y);
    report.tstr_per_repetition.push_back(on_synth.accuracy(test_x, test_y));

    ProfileClassifier on_real(steps, k, cfg.classifier, derive_seed(rep_seed, "trts"));
    on_real.fit(test_x, test_y);
    report.trts_per_repetition.push_back(on_real.accuracy(synth_x, synth_y));
  }
  report.tstr_accuracy = stats::mean(report.tstr_per_repetition);
  report.trts_accuracy = stats::mean(report.trts_per_repetition);
  return report;
}

}  // namespace hedge::eval
