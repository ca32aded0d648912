// diagnostics.hpp
// Conserved and almost-conserved quantities of the cubic defocusing NLS
//   i u_t + Lap u = |u|^2 u
// on the discretized cylinder: mass, energy, H^s norm, the modified energy
// E_I with its quartic Lambda4 correction, the split of dE_I/dt into a
// quartic Lambda4~ term and a sextic Lambda6 term, and windowed X^{s,b} norms.
//
// Lattice sums use the (dzeta) weight w = 2pi/L per free frequency variable.
// Conjugate slots use ubar^(zeta) = conj(u^(-zeta)).
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "cylnls/multipliers.hpp"
#include "cylnls/spectral_domain.hpp"

namespace cylnls {

double mass(const SpectralField& f);
/// E = int (1/2 |grad u|^2 + 1/4 |u|^4); the quartic integral is the physical
/// Riemann sum, exact for fields supported in |k| < n/4.
double energy(const SpectralField& f);
/// E with the quartic integral as an exact lattice convolution over the
/// nonzero modes (no aliasing). Throws ComplexityError above the cap.
double energy_exact(const SpectralField& f, std::size_t mode_cap = 512);
double hs_norm(const SpectralField& f, double s);

enum class QuarticMode { Exact, Thresholded };

struct ModifiedEnergyConfig {
  MultiplierSpec spec;
  QuarticMode mode = QuarticMode::Exact;
  double eps_amp = 1e-6;        // thresholded: drop |u^| < eps_amp * max|u^|
  double k_max = 0.0;           // thresholded: drop |zeta| > k_max; 0 disables
  std::size_t mode_cap = 512;   // retained-mode cap for the O(K^3) sum

  void validate() const;
};

struct ModifiedEnergyResult {
  double value = 0.0;      // E_I
  double kinetic = 0.0;    // 1/2 ||grad I u||^2
  double quartic = 0.0;    // 1/(4 (2pi)^2) * Lambda4 contraction
  double imag_part = 0.0;  // imaginary residue of the quartic contraction
  std::size_t modes = 0;   // retained modes in the quartic sum
};

/// Throws ComplexityError when the retained-mode count exceeds the cap.
ModifiedEnergyResult modified_energy_detail(const SpectralField& f, const ModifiedEnergyConfig& cfg);
double modified_energy(const SpectralField& f, const ModifiedEnergyConfig& cfg);

struct DecompositionOptions {
  /// Modes on which the nonlinearity is retained by the flow (Galerkin set).
  /// Empty means the nonzero support of the center frame.
  std::vector<bool> retained;
  std::size_t sextic_mode_cap = 32;
  /// Relative disagreement between the 4th- and 2nd-order stencils above which
  /// the step is reported as too coarse.
  double fd_tolerance = 1e-5;
};

struct DecompositionRecord {
  double t = 0.0;
  double lhs = 0.0;       // dE_I/dt by centered finite differences
  double quartic = 0.0;   // Lambda4~ contraction
  double sextic = 0.0;    // Lambda6 contraction
  double residual = 0.0;  // lhs - quartic - sextic
  double fd_error = 0.0;  // |4th-order - 2nd-order| estimate
  bool coarse_dt = false;
  std::string warning;
};

/// Quartic term  +i/(4(2pi)^2) int Lambda4~ u ubar u ubar  (real part).
double quartic_increment_term(const SpectralField& f, const MultiplierSpec& spec,
                              std::size_t mode_cap = 512);
/// Sextic term  -i/(4(2pi)^4) int Lambda6 u ubar u ubar u ubar  (real part),
/// with each merged slot restricted to the retained set.
double sextic_increment_term(const SpectralField& f, const MultiplierSpec& spec,
                             const std::vector<bool>& retained, std::size_t mode_cap = 32);

/// Evaluates the decomposition at frame `center` of the trace, which needs two
/// frames on each side (one on each side falls back to a 2nd-order stencil).
DecompositionRecord energy_derivative_decomposition(const SpaceTimeTrace& trace, std::size_t center,
                                                    const ModifiedEnergyConfig& cfg,
                                                    const DecompositionOptions& opts = {});

struct XsbWindow {
  std::size_t first = 0;
  std::size_t count = 0;  // 0 means to the end of the trace
};

struct XsbResult {
  double rectangular = 0.0;
  double hann = 0.0;  // Hann taper normalized to unit mean square
  std::size_t samples = 0;
};

/// Windowed X^{s,b} norm. The time transform uses the kernel exp(+i t tau), so
/// free solutions concentrate on tau = |zeta|^2. Throws std::invalid_argument
/// for windows shorter than 8 samples.
XsbResult xsb_norm(const SpaceTimeTrace& trace, double s, double b, const XsbWindow& window = {});

/// Magnitude of the demodulated time spectrum of one mode over the window,
/// indexed by sigma_j = 2pi j / (K dt), j = -K/2 .. K/2-1 (rectangular window).
std::vector<double> mode_time_spectrum(const SpaceTimeTrace& trace, std::size_t mode_index,
                                       const XsbWindow& window = {});

}  // namespace cylnls
