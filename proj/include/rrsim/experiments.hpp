#pragma once

#include "rrsim/analysis.hpp"
#include "rrsim/systems.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>

namespace rrsim {

/// Parsed experiment configuration. Parsing is strict: unknown fields anywhere
/// in the document are rejected. Units: times s, masses kg, lengths m, rates
/// rad/s, inertia kg m^2.
struct ExperimentConfig {
  std::string experiment;
  std::string system_preset;  // "coupled-linear" or "spacecraft"
  nlohmann::json system_overrides = nlohmann::json::object();
  std::optional<nlohmann::json> schedule;
  std::optional<double> step;
  std::optional<double> horizon;
  int record_stride = 1;
  std::optional<double> epsilon;
  std::optional<double> eta;
  double settle_fraction = 0.9;
  std::optional<std::array<double, 2>> window;
  std::optional<std::vector<double>> taus;
  std::vector<double> probe_radii{1e-1, 1e-3, 1e-5};
  double probe_ball = 0.1;
  std::uint64_t seed = 2025;
  std::filesystem::path output_dir = "out";

  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig from_file(const std::filesystem::path& path);
};

struct RunResult {
  int exit_code = 0;
  nlohmann::json report;
};

/// Executes one experiment family and writes trajectories (CSV), reports
/// (JSON) and gnuplot scripts into the configured output directory.
/// Exit conventions: 0 on expected outcome (including deliberate divergence in
/// the two instability experiments, marked "diverged-as-expected" in the
/// report); nonzero when an experiment that expects boundedness blew up or an
/// expected divergence failed to appear.
RunResult run_experiment(const ExperimentConfig& cfg);

/// Human-readable parameter tables of the shipped presets, with units.
std::string presets_text();

/// Quick invariant suite (schedule periodicity, cycle averaging, bound
/// round-trips, chatter cancellation, integrator order, CSV round-trip).
/// Prints one line per check; returns the number of failures.
int selftest();

}  // namespace rrsim
