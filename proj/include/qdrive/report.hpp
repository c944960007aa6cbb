#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qdrive/harness.hpp"

namespace qdrive {

enum class TraceField { D, Phi, V };

// Per-timestep mean and population standard deviation across traces, aligned
// by row index. Rows past the end of a shorter trace are skipped.
struct SeriesStats {
    std::vector<double> t;
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<std::size_t> count;
};

SeriesStats mean_std(const std::vector<Trace>& traces, TraceField field);

// Line plot of the mean with a shaded +-1 std band.
std::string svg_mean_std(const SeriesStats& s, const std::string& title, const std::string& ylabel);

// Per-episode training reward.
std::string svg_curve(const std::vector<double>& curve, const std::string& title);

// Writes <prefix>_d.svg, <prefix>_phi.svg and <prefix>_v.svg into dir.
std::vector<std::filesystem::path> emit_plots(const std::vector<Trace>& traces, const std::filesystem::path& dir,
                                              const std::string& prefix);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// One value per line with 17 significant digits, prefixed by "episode,reward".
std::string curve_to_csv(const std::vector<double>& curve);
std::vector<double> curve_from_csv(const std::string& text);

}  // namespace qdrive
