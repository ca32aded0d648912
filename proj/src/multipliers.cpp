// multipliers.cpp
// Radial multiplier, quartic/sextic symbols, projections and the Monte Carlo
// multiplier-bound sampler.

#include "cylnls/multipliers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

namespace cylnls {

std::string_view profile_name(SmoothingProfile p) {
  switch (p) {
    case SmoothingProfile::QuinticLog:
      return "quintic-log";
  }
  return "unknown";
}

SmoothingProfile parse_profile(std::string_view name) {
  if (name == "quintic-log") return SmoothingProfile::QuinticLog;
  throw std::invalid_argument("unknown smoothing profile '" + std::string(name) + "'");
}

void MultiplierSpec::validate() const {
  if (!(s > 1.0) || !std::isfinite(s)) throw std::invalid_argument("multiplier: s must be > 1");
  if (!(n > 1.0) || !std::isfinite(n)) throw std::invalid_argument("multiplier: N must be > 1");
}

double m_eval(const MultiplierSpec& spec, double abs_zeta) {
  const double r = abs_zeta / spec.n;
  if (r < 1.0) return 1.0;
  if (r > 2.0) return std::pow(r, spec.s - 1.0);
  // log m = (s-1) ln2 G(tau), tau = log2(|zeta|/N), G = 6t^3 - 8t^4 + 3t^5.
  // G(0)=G'(0)=G''(0)=0 and G(1)=G'(1)=1, G''(1)=0, so log m is C^2 in log|zeta|
  // against both the constant and the power-law branch.
  const double tau = std::log2(r);
  const double g = tau * tau * tau * (6.0 + tau * (-8.0 + 3.0 * tau));
  return std::exp((spec.s - 1.0) * std::numbers::ln2 * g);
}

SpectralField apply_I(const MultiplierSpec& spec, const SpectralField& f) {
  SpectralField out = f;
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] *= m_eval(spec, g.freq(i));
  return out;
}

double theta0(const Freq& z1, const Freq& z2, const Freq& z3, const Freq& z4) {
  return 1.0 / (1.0 + z1.norm() + z2.norm() + z3.norm() + z4.norm());
}

double quartic_numerator(const MultiplierSpec& spec, const Freq& z1, const Freq& z2, const Freq& z3,
                         const Freq& z4) {
  return energy_weight(spec, z1) - energy_weight(spec, z2) + energy_weight(spec, z3) -
         energy_weight(spec, z4);
}

QuarticBranch classify_quadruple(const MultiplierSpec& spec, const Freq& z1, const Freq& z2,
                                 const Freq& z3, const Freq& z4) {
  const double amax = std::max({z1.norm(), z2.norm(), z3.norm(), z4.norm()});
  if (amax < spec.low_cutoff()) return QuarticBranch::Low;
  const Freq z12 = z1 + z2;
  const Freq z14 = z1 + z4;
  const double n12 = z12.norm2();
  const double n14 = z14.norm2();
  if (n12 == 0.0 || n14 == 0.0) return QuarticBranch::Degenerate;
  const double dot = z12.dot(z14);
  const double th = theta0(z1, z2, z3, z4);
  return dot * dot > th * th * n12 * n14 ? QuarticBranch::Transverse : QuarticBranch::Resonant;
}

double lambda4(const MultiplierSpec& spec, const Freq& z1, const Freq& z2, const Freq& z3,
               const Freq& z4) {
  switch (classify_quadruple(spec, z1, z2, z3, z4)) {
    case QuarticBranch::Low:
      return 1.0;
    case QuarticBranch::Transverse:
      return quartic_numerator(spec, z1, z2, z3, z4) / (2.0 * (z1 + z2).dot(z1 + z4));
    case QuarticBranch::Resonant:
    case QuarticBranch::Degenerate:
      return 0.0;
  }
  return 0.0;
}

double lambda4_tilde(const MultiplierSpec& spec, const Freq& z1, const Freq& z2, const Freq& z3,
                     const Freq& z4) {
  switch (classify_quadruple(spec, z1, z2, z3, z4)) {
    case QuarticBranch::Low:
    case QuarticBranch::Transverse:
      return 0.0;
    case QuarticBranch::Resonant:
    case QuarticBranch::Degenerate:
      return quartic_numerator(spec, z1, z2, z3, z4);
  }
  return 0.0;
}

double lambda6(const MultiplierSpec& spec, const std::array<Freq, 6>& z) {
  return lambda4(spec, z[0] + z[1] + z[2], z[3], z[4], z[5]) -
         lambda4(spec, z[0], z[1] + z[2] + z[3], z[4], z[5]) +
         lambda4(spec, z[0], z[1], z[2] + z[3] + z[4], z[5]) -
         lambda4(spec, z[0], z[1], z[2], z[3] + z[4] + z[5]);
}

int sector_count(double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("sector width must be positive");
  return static_cast<int>(std::ceil(kTwoPi / theta - 1e-12));
}

int sector_of(const Freq& z, double theta) {
  const int count = sector_count(theta);
  return std::min(count - 1, static_cast<int>(std::floor(z.arg() / theta)));
}

bool AngularSector::contains(const Freq& z) const {
  if (z.xi == 0.0 && z.eta == 0.0) return false;
  return sector_of(z, theta) == index;
}

std::vector<double> dyadic_centers(const Grid& g) {
  double rmax = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!g.is_nyquist(i)) rmax = std::max(rmax, g.freq(i).norm());
  }
  std::vector<double> centers;
  for (double c = 1.0; c <= rmax; c *= 2.0) centers.push_back(c);
  return centers;
}

SpectralField dyadic_project(const SpectralField& f, const DyadicBand& band) {
  SpectralField out(f.grid());
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (band.contains(g.freq(i).norm())) out[i] = f[i];
  }
  return out;
}

SpectralField angular_project(const SpectralField& f, const AngularSector& sector) {
  SpectralField out(f.grid());
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (sector.contains(g.freq(i))) out[i] = f[i];
  }
  return out;
}

std::string_view regime_name(BoundRegime r) {
  switch (r) {
    case BoundRegime::DominantFirst:
      return "dominant-first";
    case BoundRegime::AngularPair:
      return "angular-pair";
    case BoundRegime::LowFrequency:
      return "low-frequency";
  }
  return "unknown";
}

BoundRegime parse_regime(std::string_view name) {
  if (name == "dominant-first") return BoundRegime::DominantFirst;
  if (name == "angular-pair") return BoundRegime::AngularPair;
  if (name == "low-frequency") return BoundRegime::LowFrequency;
  throw std::invalid_argument("unknown regime '" + std::string(name) + "'");
}

namespace {

constexpr double kSmallPairFraction = 0.25;  // "min{|z12|,|z14|} << |z1|" threshold

BoundSample finish(double lhs, double rhs) {
  BoundSample out;
  out.accepted = true;
  out.lhs = lhs;
  out.rhs = rhs;
  out.ratio = lhs == 0.0 ? 0.0 : lhs / rhs;
  return out;
}

}  // namespace

BoundSample multiplier_bound_check(const MultiplierSpec& spec, const std::array<Freq, 4>& q,
                                   BoundRegime regime) {
  const double a1 = q[0].norm();
  const double a2 = q[1].norm();
  const double a3 = q[2].norm();
  const double a4 = q[3].norm();
  const Freq z12 = q[0] + q[1];
  const Freq z14 = q[0] + q[3];
  const double lhs = std::abs(quartic_numerator(spec, q[0], q[1], q[2], q[3]));

  switch (regime) {
    case BoundRegime::DominantFirst: {
      if (a1 == 0.0 || a1 < std::max({a2, a3, a4})) return {};
      const double m1 = m_eval(spec, a1);
      const double b12 = z12.norm();
      const double b14 = z14.norm();
      const double rhs = std::min(b12, b14) >= kSmallPairFraction * a1 ? m1 * m1 * a1 * a1
                                                                       : m1 * m1 * b12 * b14;
      return finish(lhs, rhs);
    }
    case BoundRegime::AngularPair: {
      if (a1 == 0.0 || a2 < 0.5 * a1 || a2 > 2.0 * a1) return {};
      if (a3 > std::min(a1, a2) || a3 < a4 + 1.0) return {};
      const double b12 = z12.norm();
      const double b14 = z14.norm();
      if (b12 == 0.0) return finish(lhs, 0.0);
      const double cosang = std::abs(z12.dot(z14)) / (b12 * b14);
      const double m1 = m_eval(spec, a1);
      return finish(lhs, m1 * m1 * b12 * (a1 * cosang + a3));
    }
    case BoundRegime::LowFrequency: {
      if (std::max({a1, a2, a3, a4}) >= spec.low_cutoff()) return {};
      BoundSample out;
      out.accepted = true;
      out.lhs = lambda4(spec, q[0], q[1], q[2], q[3]);
      out.rhs = 1.0;
      out.ratio = out.lhs;
      out.violation = out.lhs != 1.0;
      return out;
    }
  }
  return {};
}

namespace {

struct Proposer {
  std::mt19937_64 rng;
  double radius;

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

  // A point of R x Z with |xi|, |eta| <= r.
  Freq box(double r) {
    const int ir = static_cast<int>(std::floor(r));
    return {uniform(-r, r), static_cast<double>(uniform_int(-ir, ir))};
  }

  std::array<Freq, 4> close(const Freq& z1, const Freq& z2, const Freq& z3) {
    return {z1, z2, z3, -(z1 + z2 + z3)};
  }

  std::array<Freq, 4> propose(BoundRegime regime, double low_cutoff) {
    switch (regime) {
      case BoundRegime::DominantFirst: {
        const Freq z1 = box(uniform(1.0, radius));
        const double r1 = std::max(1.0, z1.norm());
        // Half the proposals sit near z2 = -z1 to populate the small-|z12| branch.
        const Freq z2 = uniform(0.0, 1.0) < 0.5 ? -z1 + box(uniform(0.0, 0.5 * r1)) : box(r1);
        const Freq z3 = box(r1);
        return close(z1, z2, z3);
      }
      case BoundRegime::AngularPair: {
        const Freq z1 = box(uniform(1.0, radius));
        const double r1 = std::max(1.0, z1.norm());
        const Freq z2 = -z1 + box(uniform(0.0, r1));
        const Freq z3 = box(r1);
        return close(z1, z2, z3);
      }
      case BoundRegime::LowFrequency: {
        const double r = low_cutoff / std::numbers::sqrt2;
        return close(box(r), box(r), box(r));
      }
    }
    return {};
  }
};

}  // namespace

BoundSamplingSummary sample_bounds(const MultiplierSpec& spec, BoundRegime regime, std::size_t samples,
                                   std::uint64_t seed, double radius, std::size_t keep_rows) {
  spec.validate();
  if (!(radius > 1.0)) throw std::invalid_argument("sample_bounds: radius must exceed 1");
  BoundSamplingSummary out;
  out.regime = regime;
  out.seed = seed;
  out.requested = samples;
  Proposer prop{std::mt19937_64(seed), radius};
  // Hard cap on proposals so a regime that is almost never hit still terminates.
  const std::size_t max_proposals = 1000 * std::max<std::size_t>(samples, 1);
  const std::size_t half = samples / 2;
  std::size_t proposals = 0;
  while (out.accepted < samples && proposals < max_proposals) {
    ++proposals;
    const auto q = prop.propose(regime, spec.low_cutoff());
    const BoundSample bs = multiplier_bound_check(spec, q, regime);
    if (!bs.accepted) {
      ++out.rejected;
      continue;
    }
    if (bs.violation) ++out.violations;
    if (regime != BoundRegime::LowFrequency) {
      out.max_ratio = std::max(out.max_ratio, bs.ratio);
      if (out.accepted < half) out.max_ratio_first_half = out.max_ratio;
    }
    if (out.rows.size() < keep_rows) out.rows.push_back(bs);
    ++out.accepted;
  }
  return out;
}

}  // namespace cylnls
