#pragma once

#include "modfoot/footprint.hpp"
#include "modfoot/table_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace modfoot::report {

/// Projection scatter, one panel per config, points coloured by ground truth.
std::string truth_scatter_svg(const footprint::FootprintReport& rep);
/// Projection scatter of all pairs coloured by ordered cluster label.
std::string cluster_scatter_svg(const footprint::FootprintReport& rep);
/// Heat grid: rows (config, cluster ascending), columns fid.
std::string coverage_svg(const footprint::FootprintReport& rep);
/// Cumulative contribution curves for one instance, one per config. Features
/// run bottom to top by ascending mean |attribution|; each curve starts at its
/// base value and ends at its prediction.
std::string decision_svg(const io::MetaTable& meta, int fid, int iid, int dim);
/// Per-cluster top features and the config similarity matrices.
std::string summary_text(const footprint::FootprintReport& rep, int top = 5);

/// Writes every figure and summary.txt into out_dir and returns the file
/// names written, sorted. Throws SchemaError when meta and report disagree.
std::vector<std::string> render_report(const footprint::FootprintReport& rep, const io::MetaTable& meta,
                                       const std::filesystem::path& out_dir);

}  // namespace modfoot::report
