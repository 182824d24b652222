#include "rrsim/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"rrsim - round-robin sparsified feedback simulation toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "run one experiment from a JSON config");
  run->add_option("config", config_path, "path to the experiment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);

  auto* presets = app.add_subcommand("presets", "print the shipped system presets");
  auto* selftest = app.add_subcommand("selftest", "run the built-in invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*presets) {
      std::fputs(rrsim::presets_text().c_str(), stdout);
      return 0;
    }
    if (*selftest) {
      const int failures = rrsim::selftest();
      std::printf("%s (%d failure%s)\n", failures == 0 ? "selftest passed" : "selftest FAILED",
                  failures, failures == 1 ? "" : "s");
      return failures == 0 ? 0 : 1;
    }
    const auto cfg = rrsim::ExperimentConfig::from_file(config_path);
    const auto result = rrsim::run_experiment(cfg);
    std::cout << result.report.dump(2) << "\n";
    if (result.report.value("diverged_as_expected", false))
      std::cout << "diverged-as-expected\n";
    return result.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
