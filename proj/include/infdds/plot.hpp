#pragma once

#include <filesystem>

#include "infdds/trajectory.hpp"

namespace infdds {

// Standalone SVG of sampling-probability trajectories: one polyline per
// dataset over steps, y in [0,1], legend with dataset names.
void plot_trajectories(const std::filesystem::path& csv_path,
                       const std::filesystem::path& out_svg);

void plot_trajectories(const TrajectoryLog& log, const std::filesystem::path& out_svg);

}  // namespace infdds
