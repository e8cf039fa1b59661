#pragma once

#include <optional>
#include <string_view>

#include "config.hpp"

namespace hedge::cli {

enum class Figure { fill_compare, clusters, bands, tstr, factor_matrix };
inline constexpr Figure kFigures[] = {Figure::fill_compare, Figure::clusters, Figure::bands, Figure::tstr,
                                      Figure::factor_matrix};

std::string_view to_string(Figure figure);
Figure parse_figure(std::string_view text);

// Each command reads its prerequisites below cfg.paths, writes its outputs
// and a manifest, and throws on failure.
void cmd_corpus(const RunConfig& cfg);
void cmd_prepare(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_generate(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
/// All figures when `figure` is empty.
void cmd_plot(const RunConfig& cfg, std::optional<Figure> figure);

/// Process exit status for an exception escaping a command: 2 config,
/// 3 missing artifact, 4 data error, 1 anything else.
int exit_code_for(const std::exception& e);

}  // namespace hedge::cli
