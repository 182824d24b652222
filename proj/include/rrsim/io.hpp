#pragma once

#include "rrsim/integrator.hpp"

#include <filesystem>
#include <string>

namespace rrsim {

/// Writes `t,x1,...,xd,active` rows at full double precision (17 significant
/// digits). Byte-stable across runs for identical trajectories.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);

/// Parses a file produced by write_trajectory_csv; exact round-trip.
Trajectory read_trajectory_csv(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace rrsim
