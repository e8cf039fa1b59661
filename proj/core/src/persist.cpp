#include "hedge/persist.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "csv_util.hpp"

namespace hedge::persist {

using nlohmann::json;

namespace {

json parse(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

template <typename Fn>
auto decode(const char* what, Fn&& fn) {
  try {
    return fn();
  } catch (const json::exception& e) {
    throw DataError(std::string(what) + ": " + e.what());
  }
}

json net_to_json(const neural::DenseNet& net) {
  json layers = json::array();
  for (const auto& layer : net.layers()) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(layer.weights.size()));
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) w.push_back(layer.weights(i, j));
    }
    layers.push_back({{"weights", w}, {"bias", std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size())}});
  }
  return {{"layer_dims", net.layer_dims()},
          {"hidden_activation", neural::to_string(net.hidden_activation())},
          {"output_activation", neural::to_string(net.output_activation())},
          {"dropout", net.dropout()},
          {"layers", layers}};
}

neural::DenseNet net_from_json(const json& j) {
  neural::DenseNet net(j.at("layer_dims").get<std::vector<int>>(),
                       neural::parse_activation(j.at("hidden_activation").get<std::string>()),
                       neural::parse_activation(j.at("output_activation").get<std::string>()),
                       j.at("dropout").get<double>());
  const auto& layers = j.at("layers");
  if (layers.size() != net.layers().size()) throw DataError("network: layer count does not match layer_dims");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& layer = net.layers()[l];
    const auto w = layers[l].at("weights").get<std::vector<double>>();
    const auto b = layers[l].at("bias").get<std::vector<double>>();
    if (w.size() != static_cast<std::size_t>(layer.weights.size()) || b.size() != static_cast<std::size_t>(layer.bias.size())) {
      throw DataError("network: tensor size does not match layer_dims");
    }
    std::size_t k = 0;
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i) {
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) layer.weights(i, c) = w[k++];
    }
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = b[static_cast<std::size_t>(i)];
  }
  return net;
}

constexpr std::array<const char*, stats::kBandSeries> kSeriesNames{"p10", "p25", "p50", "p75", "p90", "mean"};

json key_json(DataType type, DayTransition key) {
  return {{"data_type", to_string(type)}, {"d_from", to_string(key.from)}, {"d_to", to_string(key.to)}};
}

DayTransition key_from_json(const json& j) {
  return {parse_day_type(j.at("d_from").get<std::string>()), parse_day_type(j.at("d_to").get<std::string>())};
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string to_json(const prep::ClusterModel& model) {
  json j{{"data_type", to_string(model.data_type)},
         {"day_type", to_string(model.day_type)},
         {"K", model.k},
         {"feature_spec", prep::to_string(model.feature_spec)},
         {"centroids", model.centroids},
         {"no_travel_cluster", model.no_travel_cluster ? json(*model.no_travel_cluster) : json(nullptr)}};
  return j.dump(1) + "\n";
}

prep::ClusterModel cluster_model_from_json(std::string_view text) {
  const json j = parse(text, "cluster model");
  return decode("cluster model", [&] {
    prep::ClusterModel m;
    m.data_type = parse_data_type(j.at("data_type").get<std::string>());
    m.day_type = parse_day_type(j.at("day_type").get<std::string>());
    m.k = j.at("K").get<int>();
    m.feature_spec = prep::parse_feature_spec(j.at("feature_spec").get<std::string>());
    m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    if (!j.at("no_travel_cluster").is_null()) m.no_travel_cluster = j.at("no_travel_cluster").get<int>();
    return m;
  });
}

std::string to_json(const gan::GanWeights& weights) {
  json targets;
  for (std::size_t s = 0; s < stats::kBandSeries; ++s) targets[kSeriesNames[s]] = weights.targets.series[s];
  json j{{"data_type", to_string(weights.key.data_type)},
         {"day_type", to_string(weights.key.day_type)},
         {"cluster", weights.key.cluster},
         {"T", weights.steps},
         {"noise_dim", weights.noise_dim},
         {"generator", net_to_json(weights.generator)},
         {"discriminator", net_to_json(weights.discriminator)},
         {"real_percentile_targets", targets}};
  return j.dump() + "\n";
}

gan::GanWeights gan_weights_from_json(std::string_view text) {
  const json j = parse(text, "gan weights");
  return decode("gan weights", [&] {
    gan::GanWeights w;
    w.key.data_type = parse_data_type(j.at("data_type").get<std::string>());
    w.key.day_type = parse_day_type(j.at("day_type").get<std::string>());
    w.key.cluster = j.at("cluster").get<int>();
    w.steps = j.at("T").get<int>();
    w.noise_dim = j.at("noise_dim").get<int>();
    w.generator = net_from_json(j.at("generator"));
    w.discriminator = net_from_json(j.at("discriminator"));
    const auto& t = j.at("real_percentile_targets");
    for (std::size_t s = 0; s < stats::kBandSeries; ++s) w.targets.series[s] = t.at(kSeriesNames[s]).get<std::vector<double>>();
    if (w.generator.input_dim() != w.noise_dim || w.generator.output_dim() != w.steps ||
        w.discriminator.input_dim() != w.steps || w.discriminator.output_dim() != 1) {
      throw DataError("gan weights: network shapes do not match T and noise_dim");
    }
    return w;
  });
}

std::string to_json(const TransitionsDoc& doc) {
  const auto& f = doc.factors;
  json j = key_json(f.data_type, f.key);
  j["bin_edges"] = f.bins.edges;
  j["bins_collapsed"] = f.bins.collapsed;
  j["factor_probs"] = f.probs;
  j["factor_counts"] = f.counts;
  j["interpolated_rows"] = f.interpolated_rows;
  j["factor_marginal"] = doc.factor_marginal;
  if (doc.clusters) {
    j["K"] = doc.clusters->k();
    j["cluster_probs"] = doc.clusters->probs;
    j["cluster_counts"] = doc.clusters->counts;
    j["initial_dist"] = doc.clusters->initial_dist;
  }
  return j.dump(1) + "\n";
}

TransitionsDoc transitions_from_json(std::string_view text) {
  const json j = parse(text, "transitions");
  return decode("transitions", [&] {
    TransitionsDoc doc;
    const DataType type = parse_data_type(j.at("data_type").get<std::string>());
    const DayTransition key = key_from_json(j);
    doc.factors.data_type = type;
    doc.factors.key = key;
    doc.factors.bins.edges = j.at("bin_edges").get<std::vector<double>>();
    doc.factors.bins.collapsed = j.at("bins_collapsed").get<int>();
    doc.factors.probs = j.at("factor_probs").get<transitions::Rows>();
    doc.factors.counts = j.at("factor_counts").get<transitions::Rows>();
    doc.factors.interpolated_rows = j.at("interpolated_rows").get<int>();
    doc.factor_marginal = j.at("factor_marginal").get<std::vector<double>>();
    transitions::check_stochastic(doc.factors.probs, "factor_probs");
    if (doc.factors.bins.m() < 1 || doc.factors.probs.size() != static_cast<std::size_t>(doc.factors.bins.m())) {
      throw DataError("transitions: factor matrix does not match the bin edges");
    }
    if (j.contains("cluster_probs")) {
      transitions::ClusterTransitionMatrix c;
      c.data_type = type;
      c.key = key;
      c.probs = j.at("cluster_probs").get<transitions::Rows>();
      c.counts = j.at("cluster_counts").get<transitions::Rows>();
      c.initial_dist = j.at("initial_dist").get<std::vector<double>>();
      transitions::check_stochastic(c.probs, "cluster_probs");
      doc.clusters = std::move(c);
    }
    return doc;
  });
}

void write_prepared_days(std::ostream& out, std::span<const pipeline::PreparedDay> days, int steps) {
  out << "home_id,date,cluster,factor,zero_day";
  for (int t = 0; t < steps; ++t) out << ",v" << t;
  out << '\n';
  for (const auto& d : days) {
    if (d.profile.values.size() != static_cast<std::size_t>(steps)) throw InvalidArgument("days", "step count mismatch");
    out << d.home_id << ',' << format_date(d.date) << ',' << d.cluster << ',' << fmt17(d.factor) << ','
        << (d.profile.zero_day ? 1 : 0);
    for (double v : d.profile.values) out << ',' << fmt17(v);
    out << '\n';
  }
}

std::vector<pipeline::PreparedDay> read_prepared_days(std::istream& in, DataType type) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  const auto header = detail::split_fields(line);
  if (header.size() < 6 || header[0] != "home_id") throw ParseError(1, "bad prepared-profile header");
  const std::size_t steps = header.size() - 5;
  std::vector<pipeline::PreparedDay> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto f = detail::split_fields(line);
    if (f.size() != steps + 5) throw ParseError(line_no, "wrong field count");
    pipeline::PreparedDay d;
    d.home_id = std::string(f[0]);
    d.data_type = type;
    const auto date = parse_date(f[1]);
    const auto cluster = detail::parse_double(f[2]);
    const auto factor = detail::parse_double(f[3]);
    const auto zero = detail::parse_flag(f[4]);
    if (!date || !cluster || !factor || !zero) throw ParseError(line_no, "malformed row");
    d.date = *date;
    d.cluster = static_cast<int>(*cluster);
    d.factor = *factor;
    d.profile.zero_day = *zero;
    d.profile.values.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      const auto v = detail::parse_double(f[5 + t]);
      if (!v) throw ParseError(line_no, "malformed value");
      d.profile.values[t] = *v;
    }
    out.push_back(std::move(d));
  }
  return out;
}

fs::path ArtifactLayout::gan(const gan::GanKey& key) const {
  return root / std::string(to_string(key.data_type)) / std::string(to_string(key.day_type)) /
         std::to_string(key.cluster) / "gan.json";
}

fs::path ArtifactLayout::transitions(DataType type, DayTransition key) const {
  return root / std::string(to_string(type)) /
         ("transitions_" + std::string(to_string(key.from)) + "_" + std::string(to_string(key.to)) + ".json");
}

fs::path ArtifactLayout::clusters(DataType type, DayType day) const {
  return root / std::string(to_string(type)) / ("clusters_" + std::string(to_string(day)) + ".json");
}

fs::path ArtifactLayout::profiles(DataType type) const { return root / std::string(to_string(type)) / "profiles.csv"; }

void write_text(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingArtifact(path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_prepared(const pipeline::PreparedData& data, const ArtifactLayout& layout) {
  for (const auto& [type, art] : data.artifacts) {
    std::vector<pipeline::PreparedDay> days;
    for (const auto& d : data.days) {
      if (d.data_type == type) days.push_back(d);
    }
    std::ostringstream csv;
    write_prepared_days(csv, days, data.steps);
    write_text(layout.profiles(type), csv.str());
    for (const auto& [day, model] : art.cluster_models) write_text(layout.clusters(type, day), to_json(model));
    for (const auto& key : kDayTransitions) {
      TransitionsDoc doc;
      doc.factors = art.factor_matrix(key);
      if (!art.month_grouped()) doc.clusters = art.cluster_matrix(key);
      doc.factor_marginal = art.factor_marginal;
      write_text(layout.transitions(type, key), to_json(doc));
    }
  }
}

engine::DataTypeArtifacts load_artifacts(const ArtifactLayout& layout, DataType type, bool with_gans) {
  engine::DataTypeArtifacts art;
  art.data_type = type;
  for (DayType day : kDayTypes) {
    art.cluster_models[day] = cluster_model_from_json(read_text(layout.clusters(type, day)));
  }
  for (const auto& key : kDayTransitions) {
    auto doc = transitions_from_json(read_text(layout.transitions(type, key)));
    art.factor_matrices[key] = std::move(doc.factors);
    if (doc.clusters) art.cluster_matrices[key] = std::move(*doc.clusters);
    art.factor_marginal = std::move(doc.factor_marginal);
  }
  if (with_gans) {
    const fs::path dir = layout.root / std::string(to_string(type));
    for (DayType day : kDayTypes) {
      const fs::path day_dir = dir / std::string(to_string(day));
      if (!fs::is_directory(day_dir)) continue;
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(day_dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "gan.json")) files.push_back(entry.path() / "gan.json");
      }
      std::sort(files.begin(), files.end());
      for (const auto& file : files) {
        auto w = gan_weights_from_json(read_text(file));
        art.steps = w.steps;
        art.gans.emplace(w.key, std::move(w));
      }
    }
    if (art.gans.empty()) throw MissingArtifact(dir.string() + "/{day_type}/{cluster}/gan.json");
  }
  return art;
}

pipeline::PreparedData load_prepared(const ArtifactLayout& layout) {
  pipeline::PreparedData data;
  for (DataType type : kDataTypes) {
    if (!fs::exists(layout.profiles(type))) continue;
    std::ifstream in(layout.profiles(type));
    auto days = read_prepared_days(in, type);
    if (!days.empty()) data.steps = static_cast<int>(days.front().profile.values.size());
    auto art = load_artifacts(layout, type, false);
    art.steps = data.steps;
    data.artifacts[type] = std::move(art);
    data.days.insert(data.days.end(), std::make_move_iterator(days.begin()), std::make_move_iterator(days.end()));
  }
  if (data.artifacts.empty()) throw MissingArtifact(layout.profiles(DataType::load).string());
  return data;
}

void save_gan(const gan::GanWeights& weights, const ArtifactLayout& layout) {
  write_text(layout.gan(weights.key), to_json(weights));
}

}  // namespace hedge::persist
