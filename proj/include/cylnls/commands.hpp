// commands.hpp
// The six run commands behind the CLI. Each writes into one output directory:
// result files, resolved_config.json and manifest.json (version stamp, input
// and output checksums, status).
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cylnls/run_config.hpp"

namespace cylnls {

inline constexpr const char* kVersion = "0.1.0";

struct CommandOptions {
  std::string out_dir;                 // empty: output.dir from the config
  std::optional<std::uint64_t> seed;   // replaces the config seed before parsing
  std::size_t jobs = 1;
  std::optional<bool> plots;           // overrides output.plots
};

struct CommandOutcome {
  std::string out_dir;
  std::vector<std::string> files;  // written, relative to out_dir
  std::vector<std::string> warnings;
  nlohmann::json summary;          // the command's main summary object
};

/// Names accepted by run_command.
const std::vector<std::string>& command_names();

/// Parses `raw` (after the seed override), runs the command, writes outputs.
/// Throws ConfigError, NumericalError (after writing partial results),
/// ComplexityError or IoError.
CommandOutcome run_command(const std::string& name, const nlohmann::json& raw, const CommandOptions& opt);

// Pieces the commands use, exposed for tests.

/// Least-squares slope of log(running max of h) against log(<t>), over
/// points with t >= t_from.
struct GrowthFit {
  double exponent = 0.0;
  double residual = 0.0;
  std::size_t points = 0;
  bool valid = false;
};
GrowthFit fit_growth(const std::vector<double>& t, const std::vector<double>& h, double t_from);

struct IncrementRow {
  double n = 0.0;
  double dt = 0.0;
  double delta0 = 0.0;
  std::size_t steps = 0;
  double ei0 = 0.0;
  double ei1 = 0.0;
  double increment = 0.0;
};

/// One local window [0, delta0] from u0 with step close to dt (delta0 is
/// split into a whole number of steps), and the E_I increment over it.
IncrementRow energy_increment_window(const SpectralField& u0, const MultiplierSpec& spec, const SolverConfig& solver,
                                     const ModifiedEnergyConfig& me, double dt);

}  // namespace cylnls
