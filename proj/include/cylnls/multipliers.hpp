// multipliers.hpp
// The symbol layer of the modified energy: the radial multiplier m, the
// operator I, the near-resonance cutoff theta0, the quartic symbols Lambda4 and
// Lambda4~ (complementary cutoffs), the sextic Lambda6, and sharp dyadic and
// angular frequency projections.
//
// Cutoff conventions:
//   * "max |zeta_j| << N" is max |zeta_j| < N/2; its complement is >= N/2.
//   * On the degenerate set zeta12 = 0 or zeta14 = 0 (with max >= N/2) the
//     quartic numerator vanishes identically; Lambda4 is defined to be 0 there.
//   * arg(zeta) uses the branch [0, 2pi); zeta = 0 belongs to no sector.
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cylnls/spectral_domain.hpp"

namespace cylnls {

enum class SmoothingProfile {
  /// Quintic Hermite blend in log|zeta| between 1 and 2^(s-1), C^2 at both ends.
  QuinticLog,
};

std::string_view profile_name(SmoothingProfile p);
/// Throws std::invalid_argument for unknown names.
SmoothingProfile parse_profile(std::string_view name);

struct MultiplierSpec {
  double s = 2.0;  // Sobolev index, s > 1
  double n = 8.0;  // threshold N > 1
  SmoothingProfile smoothing = SmoothingProfile::QuinticLog;

  /// Throws std::invalid_argument unless s > 1 and N > 1.
  void validate() const;
  double low_cutoff() const { return 0.5 * n; }
};

/// m as a function of |zeta|.
double m_eval(const MultiplierSpec& spec, double abs_zeta);
inline double m_eval(const MultiplierSpec& spec, const Freq& z) { return m_eval(spec, z.norm()); }

/// m(zeta)^2 |zeta|^2, the weight whose alternating sums enter Lambda4.
inline double energy_weight(const MultiplierSpec& spec, const Freq& z) {
  const double m = m_eval(spec, z);
  return m * m * z.norm2();
}

/// If = F^{-1}[m fhat].
SpectralField apply_I(const MultiplierSpec& spec, const SpectralField& f);

double theta0(const Freq& z1, const Freq& z2, const Freq& z3, const Freq& z4);

/// m1^2|z1|^2 - m2^2|z2|^2 + m3^2|z3|^2 - m4^2|z4|^2.
double quartic_numerator(const MultiplierSpec& spec, const Freq& z1, const Freq& z2, const Freq& z3,
                         const Freq& z4);

enum class QuarticBranch {
  Low,          // max |zeta_j| < N/2: Lambda4 = 1 exactly
  Transverse,   // |cos angle(z12, z14)| > theta0: Lambda4 = numerator / denominator
  Resonant,     // |cos| <= theta0: carried by Lambda4~
  Degenerate,   // z12 = 0 or z14 = 0 (numerator vanishes)
};

QuarticBranch classify_quadruple(const MultiplierSpec& spec, const Freq& z1, const Freq& z2,
                                 const Freq& z3, const Freq& z4);

double lambda4(const MultiplierSpec& spec, const Freq& z1, const Freq& z2, const Freq& z3,
               const Freq& z4);
double lambda4_tilde(const MultiplierSpec& spec, const Freq& z1, const Freq& z2, const Freq& z3,
                     const Freq& z4);
double lambda6(const MultiplierSpec& spec, const std::array<Freq, 6>& z);

/// Lambda4 from precomputed per-mode data, for the O(K^3) sums. `w` holds the
/// energy weights m^2|z|^2 and `a` the magnitudes |z|.
inline double lambda4_kernel(const Freq& z1, const Freq& z2, const Freq& z4,
                             const std::array<double, 4>& w, const std::array<double, 4>& a,
                             double low_cutoff) {
  const double amax = std::max(std::max(a[0], a[1]), std::max(a[2], a[3]));
  if (amax < low_cutoff) return 1.0;
  const Freq z12 = z1 + z2;
  const Freq z14 = z1 + z4;
  const double n12 = z12.norm2();
  const double n14 = z14.norm2();
  if (n12 == 0.0 || n14 == 0.0) return 0.0;
  const double dot = z12.dot(z14);
  const double th = 1.0 / (1.0 + a[0] + a[1] + a[2] + a[3]);
  if (dot * dot > th * th * n12 * n14) return (w[0] - w[1] + w[2] - w[3]) / (2.0 * dot);
  return 0.0;
}

/// Lambda4~ from precomputed data; complementary to lambda4_kernel.
inline double lambda4_tilde_kernel(const Freq& z1, const Freq& z2, const Freq& z4,
                                   const std::array<double, 4>& w, const std::array<double, 4>& a,
                                   double low_cutoff) {
  const double amax = std::max(std::max(a[0], a[1]), std::max(a[2], a[3]));
  if (amax < low_cutoff) return 0.0;
  const Freq z12 = z1 + z2;
  const Freq z14 = z1 + z4;
  const double n12 = z12.norm2();
  const double n14 = z14.norm2();
  const double num = w[0] - w[1] + w[2] - w[3];
  if (n12 == 0.0 || n14 == 0.0) return num;
  const double dot = z12.dot(z14);
  const double th = 1.0 / (1.0 + a[0] + a[1] + a[2] + a[3]);
  if (dot * dot > th * th * n12 * n14) return 0.0;
  return num;
}

struct DyadicBand {
  double center = 1.0;  // N_j, a power of two
  bool contains(double abs_zeta) const { return abs_zeta >= center && abs_zeta < 2.0 * center; }
};

struct AngularSector {
  double theta = 0.1;  // width in radians
  int index = 0;       // sector covers arg in [index*theta, (index+1)*theta)
  bool contains(const Freq& z) const;
};

/// Number of sectors of width theta needed to cover [0, 2pi).
int sector_count(double theta);
/// Sector index of a nonzero frequency.
int sector_of(const Freq& z, double theta);

/// Dyadic centers 1, 2, 4, ... whose band meets the stored lattice.
std::vector<double> dyadic_centers(const Grid& g);

SpectralField dyadic_project(const SpectralField& f, const DyadicBand& band);
SpectralField angular_project(const SpectralField& f, const AngularSector& sector);

enum class BoundRegime {
  DominantFirst,   // |z1| >= max others: numerator vs m1^2 min-branch majorant
  AngularPair,     // |z1|~|z2| >= |z3| >= |z4|+1: numerator vs angular majorant
  LowFrequency,    // all |z_j| < N/2: Lambda4 must equal 1 exactly
};

std::string_view regime_name(BoundRegime r);
BoundRegime parse_regime(std::string_view name);

struct BoundSample {
  bool accepted = false;  // quadruple lies in the requested regime
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;     // lhs / rhs, 0 when lhs == 0
  bool violation = false; // LowFrequency regime: Lambda4 != 1
};

/// Compares |numerator| with the regime's majorant. Regime mismatch yields an
/// unaccepted sample rather than an error.
BoundSample multiplier_bound_check(const MultiplierSpec& spec, const std::array<Freq, 4>& quad,
                                   BoundRegime regime);

struct BoundSamplingSummary {
  BoundRegime regime{};
  std::uint64_t seed = 0;
  std::size_t requested = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;
  double max_ratio_first_half = 0.0;  // over the first half of the accepted samples
  std::vector<BoundSample> rows;       // first `keep_rows` accepted samples
};

/// Monte Carlo over random zero-sum quadruples on R x Z with |zeta| up to
/// `radius`. Proposals are drawn from a regime-adapted distribution and then
/// filtered by the regime test.
BoundSamplingSummary sample_bounds(const MultiplierSpec& spec, BoundRegime regime, std::size_t samples,
                                   std::uint64_t seed, double radius, std::size_t keep_rows = 0);

}  // namespace cylnls
