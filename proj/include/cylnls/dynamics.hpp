// dynamics.hpp
// Time stepping for i u_t + Lap u = |u|^2 u. The linear flow acts as
// u^(t, zeta) = exp(-i |zeta|^2 t) u^(0, zeta); the nonlinear flow is solved
// exactly in physical space, u -> u exp(-i |u|^2 dt). Strang splitting
// composes half-linear, full-nonlinear (then optional dealias), half-linear.
#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cylnls/diagnostics.hpp"
#include "cylnls/multipliers.hpp"
#include "cylnls/spectral_domain.hpp"

namespace cylnls {

/// How the nonlinear half of the split is advanced.
///  ExactPhase: u -> u exp(-i |u|^2 dt) on the grid, then the dealias mask.
///  GalerkinRk4: classical RK4 on v' = -i P(|u|^2 u) inside the dealiased band.
///    Mass is conserved only to O(dt^5) per step, but the split stays second
///    order for the truncated flow (the exact phase followed by P is first order
///    once energy reaches the cutoff).
enum class NonlinearSubstep { ExactPhase, GalerkinRk4 };

const char* substep_name(NonlinearSubstep s);
NonlinearSubstep parse_substep(const std::string& name);

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  bool dealias = true;
  /// Retained fraction of each half-band: keep |k_x| < f nx/2 and |k_y| < f ny/2.
  /// 2/3 is the usual rule; 1/2 makes the cubic step an exact Galerkin truncation.
  double dealias_fraction = 2.0 / 3.0;
  bool nonlinear = true;
  NonlinearSubstep substep = NonlinearSubstep::ExactPhase;
  double kappa = 0.5;             // delta0 = kappa * ||I u0||_{H^1}^{-c}
  double step_heuristic_c = 2.0;
  double mass_drift_limit = 1e-6;
  double boundary_threshold = 1e-6;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Modes kept by the dealias projection (Nyquist lines are always dropped).
std::vector<bool> dealias_mask(const Grid& g, double fraction);

SpectralField linear_propagate(const SpectralField& f, double t);
SpectralField nonlinear_phase_step(const SpectralField& f, double dt);
/// One step; throws NumericalError if the result is not finite.
SpectralField strang_step(const SpectralField& f, double dt, const SolverConfig& cfg);

/// Reusable stepper that keeps FFT plans and phase tables between steps.
class StrangStepper {
 public:
  StrangStepper(const Grid& g, const SolverConfig& cfg);
  ~StrangStepper();
  StrangStepper(const StrangStepper&) = delete;
  StrangStepper& operator=(const StrangStepper&) = delete;

  /// Advances `u` by h in place. On a non-finite result `u` is left untouched
  /// and NumericalError is thrown.
  void step(SpectralField& u, double h);
  /// Applies the dealias projection (no-op when dealiasing is off).
  void project(SpectralField& u) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// delta0 = kappa * ||I u0||_{H^1}^{-c}.
double local_window_length(const SpectralField& u0, const MultiplierSpec& spec, const SolverConfig& cfg);

struct DiagnosticRecord {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double hs_norm = 0.0;
  double ei = 0.0;  // NaN when the modified energy is not tracked
  double boundary_mass = 0.0;
};

struct SimulationOptions {
  std::size_t diag_every = 10;   // steps between diagnostic records
  std::size_t frame_every = 0;   // steps between stored frames; 0 stores none
  double hs_s = 1.0;
  MultiplierSpec spec;           // for I in delta0 and E_I
  std::optional<ModifiedEnergyConfig> modified_energy;
};

struct SimulationResult {
  SpaceTimeTrace trace;
  std::vector<DiagnosticRecord> series;
  double delta0 = 0.0;
  std::vector<double> window_starts;  // window boundaries, multiples of the step
  SpectralField final_state;
  double final_time = 0.0;
  std::size_t steps = 0;
  bool aborted = false;
  std::string abort_reason;
  bool boundary_flagged = false;
  double max_boundary_mass = 0.0;
  double max_mass_drift = 0.0;
};

/// Integrates to cfg.t_end. Instability (non-finite state or mass drift above
/// the limit) stops the run with aborted = true and the last good state.
SimulationResult simulate(const SpectralField& u0, const SolverConfig& cfg, const SimulationOptions& opts);

}  // namespace cylnls
