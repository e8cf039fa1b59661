#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "hedge/persist.hpp"
#include "manifest.hpp"
#include "svg.hpp"

namespace hedge::cli {

namespace {

using json = nlohmann::json;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  [[nodiscard]] std::vector<double> column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("missing column " + name);
    const auto j = static_cast<std::size_t>(it - header.begin());
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r.at(j));
    return out;
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  return out;
}

Table read_table(const fs::path& path) {
  std::istringstream in(persist::read_text(path));
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  t.header = split(line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& f : split(line)) {
      try {
        row.push_back(std::stod(f));
      } catch (const std::exception&) {
        throw ParseError(line_no, path.string() + ": not a number '" + f + "'");
      }
    }
    if (row.size() != t.header.size()) throw ParseError(line_no, path.string() + ": wrong field count");
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string str(DataType t) { return std::string(to_string(t)); }
std::string str(DayType d) { return std::string(to_string(d)); }

std::vector<double> steps_axis(std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = static_cast<double>(i);
  return x;
}

struct PlotContext {
  const RunConfig& cfg;
  fs::path out;
  Manifest& manifest;

  std::string read(const fs::path& p) {
    auto text = persist::read_text(p);
    manifest.add_input(cfg.paths.root, p);
    return text;
  }
  Table table(const fs::path& p) {
    auto t = read_table(p);
    manifest.add_input(cfg.paths.root, p);
    return t;
  }
  void emit(const std::string& stem, const std::string& csv, const std::string& svg_text) {
    persist::write_text(out / (stem + ".csv"), csv);
    persist::write_text(out / (stem + ".svg"), svg_text);
  }
};

void plot_fill_compare(PlotContext& ctx) {
  const auto report = json::parse(ctx.read(ctx.cfg.paths.artifacts() / "prepare_report.json"));
  if (!report.contains("fill_comparison")) throw DataError("prepare_report.json: no fill comparison recorded");
  std::string csv = "method,mean_abs_error,p99_abs_error,points\n";
  svg::BarChart chart{"Gap-filling error by method", "absolute error (kWh)", {}, {"mean", "99th percentile"}, {{}, {}}};
  for (const auto& e : report["fill_comparison"]) {
    const auto method = e["method"].get<std::string>();
    const double mae = e["mean_abs_error"].get<double>();
    const double p99 = e["p99_abs_error"].get<double>();
    csv += method + "," + fmt(mae) + "," + fmt(p99) + "," + std::to_string(e["points"].get<std::size_t>()) + "\n";
    chart.categories.push_back(method);
    chart.values[0].push_back(mae);
    chart.values[1].push_back(p99);
  }
  ctx.emit("fill_compare", csv, svg::render(chart));
}

void plot_clusters(PlotContext& ctx) {
  const persist::ArtifactLayout layout{ctx.cfg.paths.artifacts()};
  bool any = false;
  for (DataType type : kDataTypes) {
    if (!fs::exists(layout.profiles(type))) continue;
    any = true;
    std::istringstream in(ctx.read(layout.profiles(type)));
    const auto days = persist::read_prepared_days(in, type);
    for (DayType day : kDayTypes) {
      std::map<int, std::pair<std::vector<double>, int>> sums;
      for (const auto& d : days) {
        if (d.day_type() != day || d.profile.zero_day) continue;
        auto& [sum, n] = sums[d.cluster];
        if (sum.empty()) sum.assign(d.profile.values.size(), 0.0);
        for (std::size_t t = 0; t < sum.size(); ++t) sum[t] += d.profile.values[t];
        ++n;
      }
      if (sums.empty()) continue;
      const std::string label = type == DataType::pv ? "month" : "cluster";
      std::string csv = "t";
      svg::LineChart chart{str(type) + " " + str(day) + " mean normalised profile per " + label, "step",
                           "share of daily energy", {}, {}};
      std::size_t steps = 0;
      for (auto& [c, entry] : sums) {
        auto& [sum, n] = entry;
        for (double& v : sum) v /= n;
        steps = sum.size();
        csv += "," + label + "_" + std::to_string(c);
        chart.lines.push_back({label + " " + std::to_string(c) + " (n=" + std::to_string(n) + ")", steps_axis(steps), sum});
      }
      csv += "\n";
      for (std::size_t t = 0; t < steps; ++t) {
        csv += std::to_string(t);
        for (const auto& [c, entry] : sums) csv += "," + fmt(entry.first[t]);
        csv += "\n";
      }
      ctx.emit("clusters_" + str(type) + "_" + str(day), csv, svg::render(chart));
    }
  }
  if (!any) throw MissingArtifact(layout.profiles(DataType::load).string());
}

void plot_bands(PlotContext& ctx) {
  const fs::path dir = ctx.cfg.paths.output() / "evaluate" / "bands";
  std::vector<fs::path> reals;
  if (fs::is_directory(dir)) {
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      if (name.ends_with("_real.csv")) reals.push_back(e.path());
    }
  }
  if (reals.empty()) throw MissingArtifact((dir / "{key}_real.csv").string());
  std::sort(reals.begin(), reals.end());
  static const char* kSeries[] = {"p10", "p25", "p50", "p75", "p90", "mean"};
  for (const auto& real_path : reals) {
    const std::string name = real_path.filename().string();
    const std::string stem = name.substr(0, name.size() - std::string("_real.csv").size());
    const auto real = ctx.table(real_path);
    const auto gen = ctx.table(dir / (stem + "_generated.csv"));
    if (real.rows.size() != gen.rows.size()) throw DataError(stem + ": real and generated bands differ in length");

    std::string csv = "t";
    for (const char* prefix : {"real_", "generated_"}) {
      for (const char* s : kSeries) csv += std::string(",") + prefix + s;
    }
    csv += "\n";
    for (std::size_t t = 0; t < real.rows.size(); ++t) {
      csv += std::to_string(t);
      for (const auto* tab : {&real, &gen}) {
        for (const char* s : kSeries) csv += "," + fmt(tab->column(s)[t]);
      }
      csv += "\n";
    }
    const auto x = steps_axis(real.rows.size());
    svg::LineChart chart{stem + ": generated vs real population", "step", "share of daily energy",
                         {{"real p10-p90", x, real.column("p10"), real.column("p90")},
                          {"generated p10-p90", x, gen.column("p10"), gen.column("p90")}},
                         {{"real median", x, real.column("p50")}, {"generated median", x, gen.column("p50")}}};
    ctx.emit("bands_" + stem, csv, svg::render(chart));
  }
}

void plot_tstr(PlotContext& ctx) {
  const auto report = json::parse(ctx.read(ctx.cfg.paths.output() / "evaluate" / "eval_report.json"));
  svg::BarChart chart{"Classifier accuracy (" + report["data_type"].get<std::string>() + ", " +
                          report["day_type"].get<std::string>() + ")",
                      "accuracy", {}, {"mean over repetitions"}, {{}}};
  std::string csv = "classifier,accuracy\n";
  auto add = [&](const std::string& name, double v) {
    csv += name + "," + fmt(v) + "\n";
    chart.categories.push_back(name);
    chart.values[0].push_back(v);
  };
  const auto& trained = report["trained"];
  add("random", trained["random_baseline"].get<double>());
  if (!trained["centroid_baseline_accuracy"].is_null()) add("centroid", trained["centroid_baseline_accuracy"].get<double>());
  add("tstr", trained["tstr_accuracy"].get<double>());
  add("trts", trained["trts_accuracy"].get<double>());
  if (!report["epoch0"].is_null()) {
    add("tstr_epoch0", report["epoch0"]["tstr_accuracy"].get<double>());
    add("trts_epoch0", report["epoch0"]["trts_accuracy"].get<double>());
  }
  ctx.emit("tstr", csv, svg::render(chart));
}

void plot_factor_matrix(PlotContext& ctx) {
  const persist::ArtifactLayout layout{ctx.cfg.paths.artifacts()};
  const DayTransition key{DayType::weekday, DayType::weekday};
  bool any = false;
  for (DataType type : kDataTypes) {
    const fs::path path = layout.transitions(type, key);
    if (!fs::exists(path)) continue;
    any = true;
    const auto doc = persist::transitions_from_json(ctx.read(path));
    const auto& probs = doc.factors.probs;
    std::string csv = "from_bin";
    for (std::size_t j = 0; j < probs.size(); ++j) csv += ",to_" + std::to_string(j);
    csv += "\n";
    for (std::size_t i = 0; i < probs.size(); ++i) {
      csv += std::to_string(i);
      for (double p : probs[i]) csv += "," + fmt(p);
      csv += "\n";
    }
    svg::Heatmap chart{str(type) + " factor transitions weekday to weekday", "next-day factor bin", "factor bin",
                       probs};
    ctx.emit("factor_matrix_" + str(type), csv, svg::render(chart));
  }
  if (!any) throw MissingArtifact(layout.transitions(DataType::load, key).string());
}

}  // namespace

void cmd_plot(const RunConfig& cfg, std::optional<Figure> figure) {
  const fs::path out = cfg.paths.output() / "figures";
  Manifest m;
  m.command = "plot";
  m.seed = cfg.seed;
  m.config = cfg.entries();
  m.config["plot.figure"] = figure ? std::string(to_string(*figure)) : "all";
  PlotContext ctx{cfg, out, m};
  for (Figure f : kFigures) {
    if (figure && *figure != f) continue;
    switch (f) {
      case Figure::fill_compare: plot_fill_compare(ctx); break;
      case Figure::clusters: plot_clusters(ctx); break;
      case Figure::bands: plot_bands(ctx); break;
      case Figure::tstr: plot_tstr(ctx); break;
      case Figure::factor_matrix: plot_factor_matrix(ctx); break;
    }
    spdlog::info("plot: {} -> {}", to_string(f), out.string());
  }
  m.add_outputs_under(cfg.paths.root, out);
  write_manifest(out, m);
}

}  // namespace hedge::cli
