#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"
#include "config.hpp"

using namespace hedge;
using namespace hedge::cli;

int main(int argc, char** argv) {
  CLI::App app{"hedge: synthetic residential load, PV and EV profiles"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> sets;
  bool quiet = false;
  app.add_option("--config", config_path, "INI configuration file");
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out", out, "workspace root; relative paths in the config resolve against it");
  app.add_option("--set", sets, "override a config key, e.g. --set train.n_epochs=50")->take_all();
  app.add_flag("-q,--quiet", quiet, "only report errors");

  auto* corpus = app.add_subcommand("corpus", "synthesise the reference corpus");
  auto* prepare = app.add_subcommand("prepare", "ingest, fill, normalise, cluster and estimate transitions");
  auto* train = app.add_subcommand("train", "train one GAN per (data type, day type, cluster)");
  auto* generate = app.add_subcommand("generate", "generate multi-day sequences for synthetic homes");
  auto* evaluate = app.add_subcommand("evaluate", "percentile bands and TSTR/TRTS accuracy");
  auto* plot = app.add_subcommand("plot", "emit figure CSVs and SVGs");

  std::optional<int> homes;
  std::optional<int> days;
  std::optional<std::string> start;
  generate->add_option("--homes", homes, "number of homes");
  generate->add_option("--days", days, "days per home");
  generate->add_option("--start", start, "first day, YYYY-MM-DD");

  std::optional<std::string> figure;
  plot->add_option("--figure", figure, "one of fill_compare, clusters, bands, tstr, factor_matrix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  auto logger = spdlog::stderr_logger_st("hedge");
  logger->set_pattern("hedge: %v");
  logger->set_level(quiet ? spdlog::level::warn : spdlog::level::info);
  spdlog::set_default_logger(logger);

  std::optional<RunConfig> cfg;
  std::string section;
  try {
    std::vector<Override> overrides;
    for (const auto& s : sets) overrides.push_back(parse_override(s));
    if (seed) overrides.emplace_back("seed", std::to_string(*seed));
    if (homes) overrides.emplace_back("generate.n_homes", std::to_string(*homes));
    if (days) overrides.emplace_back("generate.n_days", std::to_string(*days));
    if (start) overrides.emplace_back("generate.start_date", *start);

    cfg = load_config(config_path ? std::optional<fs::path>(*config_path) : std::nullopt, overrides);
    if (out) cfg->paths.root = *out;
    section = app.get_subcommands().front()->get_name();

    if (*corpus) cmd_corpus(*cfg);
    else if (*prepare) cmd_prepare(*cfg);
    else if (*train) cmd_train(*cfg);
    else if (*generate) cmd_generate(*cfg);
    else if (*evaluate) cmd_evaluate(*cfg);
    else if (*plot) cmd_plot(*cfg, figure ? std::optional<Figure>(parse_figure(*figure)) : std::nullopt);
    return 0;
  } catch (const InvalidArgument& e) {
    // Module preconditions name bare fields; report the config key when one matches.
    std::string what = e.what();
    if (cfg && !dynamic_cast<const ConfigError*>(&e)) {
      const std::string key = section + "." + e.field();
      if (cfg->entries().contains(key)) what = key + what.substr(e.field().size());
    }
    std::cerr << "hedge: error: " << what << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "hedge: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
