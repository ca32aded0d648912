// run_config.hpp
// The JSON run configuration: parsing with strict key checking, defaults, and
// the resolved form written next to every result.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cylnls/diagnostics.hpp"
#include "cylnls/dynamics.hpp"
#include "cylnls/estimate_lab.hpp"
#include "cylnls/multipliers.hpp"

namespace cylnls {

struct GridBlock {
  double lx = 0.0;
  int nx = 0;
  int ny = 0;
};

enum class DataKind { Packet, PlaneWave, MultiBand, Snapshot };
enum class Placement { Rows, Polar };

/// Initial data recipe.
struct DataBlock {
  DataKind kind = DataKind::Packet;
  // packet: A exp(-(x - x0)^2 / (2 w^2)) exp(i(k x + eta y))
  double amplitude = 1.0;
  double width = 1.0;
  double center = 0.0;
  double kick = 0.0;
  int eta = 0;
  // plane wave: A exp(i(xi x + eta y)) at lattice point (kx, ky)
  int kx = 0;
  int ky = 0;
  // multi-band: per_band random modes in each band [nb, 2nb), amplitude A nb^-decay
  std::vector<double> bands{2, 4, 8, 16, 32};
  int per_band = 6;
  double decay = 2.0;
  Placement placement = Placement::Rows;
  int eta_max = -1;  // rows placement: |eta| bound; -1 derives it from the dealias mask
  std::optional<std::uint64_t> seed;  // defaults to the run seed
  // snapshot
  std::string path;
};

struct DiagnosticsBlock {
  std::size_t every = 10;
  std::size_t frame_every = 0;
  std::optional<double> hs_s;  // defaults to multiplier.s
  bool modified_energy = false;
  QuarticMode quartic_mode = QuarticMode::Exact;
  double eps_amp = 1e-6;
  double k_max = 0.0;
  std::size_t mode_cap = 512;
};

struct ExperimentBlock {
  SweepSpec sweep;
  double lx = 16.0 * 3.14159265358979323846;
};

struct EnergyIncrementBlock {
  std::vector<double> n_values{8, 16, 32, 64};
  bool dt_check = true;  // rerun every N at 2 dt
};

struct SymbolSampleBlock {
  std::vector<BoundRegime> regimes{BoundRegime::DominantFirst, BoundRegime::AngularPair,
                                   BoundRegime::LowFrequency};
  std::size_t samples = 1000000;
  double radius = 256.0;
  std::size_t keep_rows = 1000;
};

struct GrowthBlock {
  double fit_from = 1.0;  // fit uses t >= fit_from
};

struct OutputBlock {
  std::string dir = "out";
  bool csv = true;
  bool json = true;
  bool plots = false;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::optional<GridBlock> grid;
  MultiplierSpec multiplier;
  SolverConfig solver;
  std::optional<DataBlock> data;
  DiagnosticsBlock diagnostics;
  std::vector<ExperimentBlock> experiments;
  EnergyIncrementBlock energy_increment;
  SymbolSampleBlock symbol_sample;
  GrowthBlock growth;
  OutputBlock output;

  /// Throws ConfigError naming the key path when a block the command needs is absent.
  const GridBlock& require_grid() const;
  const DataBlock& require_data() const;
};

/// Parses and validates. Unknown keys, wrong types and out-of-range values
/// throw ConfigError with the offending key path.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig parse_run_config_text(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// Every field with its effective value; parse_run_config(resolve(c)) == c.
nlohmann::json resolve(const RunConfig& c);

Grid make_grid(const GridBlock& g);

/// Builds the initial field from the data recipe on the config grid.
SpectralField make_initial_data(const RunConfig& c);

ModifiedEnergyConfig modified_energy_config(const RunConfig& c, const MultiplierSpec& spec);

}  // namespace cylnls
