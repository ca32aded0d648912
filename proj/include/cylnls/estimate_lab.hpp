// estimate_lab.hpp
// Numerical checks of the bilinear and L^4 Strichartz bounds on R x T.
//
// For data phi1, phi2 the space-time function is
//   F(t,z) = int e^{-it w(z1,z2) - iz.(z1+z2)} 1_adm(z1,z2) phi1^(z1) phi2^(z2) (dz1)(dz2)
// with w = |z1|^2 + |z2|^2, or |z1|^2 - |z2|^2 for the conjugate variants.
// ||F||_{L^2([-T,T] x box)} is computed two ways: Gauss-Legendre quadrature in
// time of the physical-space product, and a pair sum over mode quadruples with
// the exact time kernel 2T sinc(dw T).
//
// The box is periodic in x, so free waves never disperse for good. Data are
// localized wave packets (Gaussian envelope in x around x = 0) and the window
// T is grown until the norm stops changing, below the time at which the
// fastest pair comes back around the box.
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cylnls/multipliers.hpp"
#include "cylnls/spectral_domain.hpp"

namespace cylnls {

enum class BilinearVariant { Separation, Angular, ConjugateSector, ConjugateSeparation, EqualBandL4 };

const char* variant_name(BilinearVariant v);
BilinearVariant parse_variant(const std::string& name);
/// Conjugate variants use the phase |z1|^2 - |z2|^2.
bool is_conjugate(BilinearVariant v);

/// Support restrictions for make_localized_data. Unset members do not restrict.
struct DataConstraints {
  std::optional<AngularSector> sector;
  std::optional<double> xi_min;  // xi >= xi_min
  std::optional<double> xi_max;  // xi < xi_max
  std::optional<int> eta_min;    // eta >= eta_min
  std::optional<int> eta_max;    // eta <= eta_max
  /// Width of the Gaussian envelope exp(-x^2/(2 s^2)) in x; 0 keeps the
  /// coefficients independent (data spread over the whole box).
  double localize = 0.0;
};

/// Unit-L^2 random field on {zeta in band} intersected with the constraints,
/// zero elsewhere. Same seed gives the same field. Throws std::invalid_argument
/// naming the violated constraint when the admissible set is empty or below
/// the lattice resolution.
SpectralField make_localized_data(const Grid& g, const DyadicBand& band, const DataConstraints& c,
                                  std::uint64_t seed);

struct BilinearExperiment {
  BilinearVariant variant = BilinearVariant::Separation;
  double n1 = 32.0;
  double n2 = 32.0;
  double m = 8.0;       // x-frequency separation
  double theta = 0.25;  // angular width
  int ell = 0;          // sector index
  double t_window = 0.0;  // half-width; 0 grows T until the tail is small
  std::size_t trials = 4;
  std::uint64_t seed = 1;
  // data recipe
  double localize = 1.5;   // packet width in x
  double slab = 1.0;       // xi-width of the separation slabs
  int eta_window = 4;      // eta lines per factor in the slab layout; 0 = all

  /// Checks the variant's hypotheses (1 < N1 <= N2, M > 1, 0 < theta < 1, ...).
  void validate() const;
};

/// Admissibility of a frequency pair: the indicator inside F.
bool pair_admissible(const BilinearExperiment& e, const Freq& z1, const Freq& z2);
/// Phase w(z1, z2) of the pair.
double pair_phase(const BilinearExperiment& e, const Freq& z1, const Freq& z2);
/// Bound formula B with ||F|| <~ B ||phi1|| ||phi2||; 1 for the L^4 variant
/// (whose ratio is ||u||_{L^4} / ||phi||).
double bound_formula(const BilinearExperiment& e);

struct BilinearOptions {
  double tail_tolerance = 0.01;  // relative growth of ||F||^2 allowed per doubling of T
  double t_initial = 0.0;        // first window, doubled up to t_max; 0 halves down from t_max
  double t_max = 0.0;            // largest window; 0 picks L/(4 max|xi1 -+ xi2|), before the fastest wrap
  std::size_t max_nodes = 400000;
  std::size_t max_groups = 64;
  std::size_t max_working_points = std::size_t{1} << 22;
  std::size_t max_modes = 16384;          // pair sum: modes per factor
  std::size_t max_pairs = 20000000;       // pair sum: stored admissible pairs
  double max_pair_terms = 2e9;            // pair sum: sum over buckets of size^2
};

struct BilinearResult {
  double norm = 0.0;     // ||F||_{L^2([-T,T] x box)}
  double t = 0.0;        // window half-width used (T*)
  double tail = 0.0;     // relative change of ||F||^2 over the last doubling
  bool reliable = true;  // false when the tail stayed above tolerance
  std::size_t nodes = 0;   // quadrature nodes (0 for the pair sum)
  std::size_t groups = 0;  // indicator groups (quadrature)
  std::string method;
};

/// ||F|| by time quadrature of the physical product of the propagated fields.
BilinearResult bilinear_norm(const BilinearExperiment& e, const SpectralField& phi1, const SpectralField& phi2,
                             const BilinearOptions& opt = {});
/// ||F|| by the closed-form pair sum. Throws ComplexityError for large supports.
BilinearResult bilinear_norm_oracle(const BilinearExperiment& e, const SpectralField& phi1,
                                    const SpectralField& phi2, const BilinearOptions& opt = {});
/// ||F||^2 / (2T) for each T by the pair sum, and its diagonal (T -> infinity)
/// part for a resonance-free pair.
struct PairSumSeries {
  std::vector<double> t;
  std::vector<double> norm2;
  double diagonal_rate = 0.0;  // sum over p of |c_p|^2 times the box factors
};
PairSumSeries pair_sum_series(const BilinearExperiment& e, const SpectralField& phi1, const SpectralField& phi2,
                              const std::vector<double>& windows, const BilinearOptions& opt = {});

/// ||u||_{L^4([-T,T] x box)} of the free evolution, from ||u^2||_{L^2}.
double l4_norm(const SpectralField& phi, double t_window, const BilinearOptions& opt = {});

enum class SweepAxis { M, Theta, N1, N2, N0, Ell };
const char* axis_name(SweepAxis a);
SweepAxis parse_axis(const std::string& name);

enum class NormMethod { Quadrature, PairSum, Auto };
const char* method_name(NormMethod m);
NormMethod parse_method(const std::string& name);

struct SweepSpec {
  BilinearExperiment base;
  SweepAxis axis = SweepAxis::M;
  std::vector<double> values;
  NormMethod method = NormMethod::Auto;
  BilinearOptions options;
  /// Also evaluate each trial without the angular indicator (angular variant)
  /// to compare the refined and unrefined bounds.
  bool compare_unrefined = false;
};

struct TrialRow {
  double axis_value = 0.0;
  std::size_t trial = 0;
  double norm = 0.0;
  double data_norm = 0.0;  // ||phi1|| ||phi2|| (||phi|| for L^4)
  double bound = 0.0;
  double ratio = 0.0;
  double t_star = 0.0;
  double tail = 0.0;
  bool reliable = true;
  double unrefined_norm = 0.0;  // only with compare_unrefined
  std::string method;
};

struct AxisSummary {
  double axis_value = 0.0;
  double max_norm = 0.0;
  double max_ratio = 0.0;
  double bound = 0.0;
  double unrefined_bound = 0.0;  // sqrt(N1/M), angular variant only
  double max_unrefined_norm = 0.0;
};

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root-mean-square residual
  bool valid = false;
};

/// Least squares y = a x + b; invalid with fewer than `min_points` points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_points = 4);

struct ExperimentReport {
  BilinearExperiment base;
  SweepAxis axis = SweepAxis::M;
  std::vector<TrialRow> rows;
  std::vector<AxisSummary> summary;
  LineFit norm_fit;   // log max norm against log axis
  LineFit ratio_fit;  // log max ratio against log axis (against l theta / 2pi for the l axis)
  double c_max = 0.0;
  double t_star_max = 0.0;
  std::size_t unreliable = 0;
  std::vector<std::string> warnings;
};

/// Grid holding every support the sweep will need, with L chosen for the
/// packet width.
Grid sweep_grid(const SweepSpec& s, double lx);

/// Runs the sweep: for each axis value, `trials` seeded data pairs, the norm
/// by the requested method, and the max-over-trials ratio to the bound.
/// Trials run on up to `jobs` threads; results do not depend on `jobs`.
ExperimentReport scaling_sweep(const Grid& g, const SweepSpec& s, std::size_t jobs = 1);

/// The data pair used by a sweep for one axis value and trial.
std::pair<SpectralField, SpectralField> sweep_data(const Grid& g, const BilinearExperiment& e, std::size_t trial);

}  // namespace cylnls
