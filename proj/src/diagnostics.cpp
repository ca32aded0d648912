// diagnostics.cpp
// Mass/energy/H^s, the lattice quartic and sextic contractions behind E_I and
// dE_I/dt, and the windowed X^{s,b} norm.

#include "cylnls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cylnls/errors.hpp"
#include "fft_workspace.hpp"

namespace cylnls {

namespace {

constexpr double kFourPiSq = 4.0 * std::numbers::pi * std::numbers::pi;  // (2pi)^2

/// Retained modes of a field with the per-mode data the quartic sums need.
struct ModeList {
  std::vector<LatticePoint> k;
  std::vector<Freq> z;
  std::vector<Complex> c;
  std::vector<double> w;  // m^2 |zeta|^2
  std::vector<double> a;  // |zeta|
  std::vector<int> lookup;  // grid index -> list position or -1

  int find(const Grid& g, const LatticePoint& p) const {
    const auto idx = g.index_of(p);
    return idx ? lookup[*idx] : -1;
  }
};

ModeList collect_modes(const SpectralField& f, const MultiplierSpec& spec, double eps_amp,
                       double k_max) {
  const Grid& g = f.grid();
  double cmax = 0.0;
  for (const auto& c : f.coeffs()) cmax = std::max(cmax, std::abs(c));
  const double floor = eps_amp * cmax;
  ModeList m;
  m.lookup.assign(g.size(), -1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.is_nyquist(i)) continue;
    const double amp = std::abs(f[i]);
    if (amp == 0.0 || amp < floor) continue;
    const Freq z = g.freq(i);
    const double a = z.norm();
    if (k_max > 0.0 && a > k_max) continue;
    m.lookup[i] = static_cast<int>(m.k.size());
    m.k.push_back(g.lattice(i));
    m.z.push_back(z);
    m.c.push_back(f[i]);
    m.w.push_back(energy_weight(spec, z));
    m.a.push_back(a);
  }
  return m;
}

enum class QuarticSymbol { Lambda4, Lambda4Tilde, One };

/// w^3 sum_{a,b,c} S(a,-b,c,-d) u_a conj(u_b) u_c conj(u_d), d = a + c - b.
Complex quartic_contraction(const Grid& g, const ModeList& m, const MultiplierSpec& spec,
                            QuarticSymbol symbol) {
  const std::size_t n = m.k.size();
  const double low = spec.low_cutoff();
  Complex total{};
  for (std::size_t ia = 0; ia < n; ++ia) {
    for (std::size_t ib = 0; ib < n; ++ib) {
      const Complex cab = m.c[ia] * std::conj(m.c[ib]);
      const LatticePoint kab = m.k[ia] - m.k[ib];
      Complex row{};
      for (std::size_t ic = 0; ic < n; ++ic) {
        const int id = m.find(g, kab + m.k[ic]);
        if (id < 0) continue;
        const std::array<double, 4> w{m.w[ia], m.w[ib], m.w[ic], m.w[id]};
        const std::array<double, 4> a{m.a[ia], m.a[ib], m.a[ic], m.a[id]};
        double lam = 1.0;
        if (symbol == QuarticSymbol::Lambda4) {
          lam = lambda4_kernel(m.z[ia], -m.z[ib], -m.z[id], w, a, low);
        } else if (symbol == QuarticSymbol::Lambda4Tilde) {
          lam = lambda4_tilde_kernel(m.z[ia], -m.z[ib], -m.z[id], w, a, low);
        }
        if (lam == 0.0) continue;
        row += lam * m.c[ic] * std::conj(m.c[id]);
      }
      total += cab * row;
    }
  }
  const double w = g.weight();
  return total * (w * w * w);
}

}  // namespace

double mass(const SpectralField& f) { return l2_norm_squared(f); }

double energy(const SpectralField& f) {
  const Grid& g = f.grid();
  double grad = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) grad += g.freq(i).norm2() * std::norm(f[i]);
  grad *= g.weight();
  const PhysicalField u = inverse_transform(f);
  double quart = 0.0;
  for (const auto& v : u.values) {
    const double r = std::norm(v);
    quart += r * r;
  }
  quart *= g.dx() * g.dy();
  return 0.5 * grad + 0.25 * quart;
}

double energy_exact(const SpectralField& f, std::size_t mode_cap) {
  const Grid& g = f.grid();
  const MultiplierSpec unit;
  const ModeList modes = collect_modes(f, unit, 0.0, 0.0);
  if (modes.k.size() > mode_cap) {
    throw ComplexityError("exact energy: " + std::to_string(modes.k.size()) + " modes exceed the cap of " +
                          std::to_string(mode_cap));
  }
  double grad = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) grad += g.freq(i).norm2() * std::norm(f[i]);
  const Complex q = quartic_contraction(g, modes, unit, QuarticSymbol::One);
  return 0.5 * g.weight() * grad + q.real() / (4.0 * kFourPiSq);
}

double hs_norm(const SpectralField& f, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("hs_norm: s must be >= 0");
  const Grid& g = f.grid();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    acc += std::pow(1.0 + g.freq(i).norm2(), s) * std::norm(f[i]);
  }
  return std::sqrt(acc * g.weight());
}

void ModifiedEnergyConfig::validate() const {
  spec.validate();
  if (!(eps_amp >= 0.0)) throw std::invalid_argument("modified energy: eps_amp must be >= 0");
  if (!(k_max >= 0.0)) throw std::invalid_argument("modified energy: k_max must be >= 0");
  if (mode_cap == 0) throw std::invalid_argument("modified energy: mode cap must be positive");
}

ModifiedEnergyResult modified_energy_detail(const SpectralField& f, const ModifiedEnergyConfig& cfg) {
  cfg.validate();
  const Grid& g = f.grid();
  ModifiedEnergyResult r;
  double kin = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) kin += energy_weight(cfg.spec, g.freq(i)) * std::norm(f[i]);
  r.kinetic = 0.5 * g.weight() * kin;

  const bool thresholded = cfg.mode == QuarticMode::Thresholded;
  const ModeList modes = collect_modes(f, cfg.spec, thresholded ? cfg.eps_amp : 0.0,
                                       thresholded ? cfg.k_max : 0.0);
  r.modes = modes.k.size();
  if (r.modes > cfg.mode_cap) {
    throw ComplexityError("modified energy: " + std::to_string(r.modes) +
                          " retained modes exceed the cap of " + std::to_string(cfg.mode_cap) +
                          (thresholded ? "; raise eps_amp or lower k_max"
                                       : "; use the thresholded quartic mode"));
  }
  const Complex q = quartic_contraction(g, modes, cfg.spec, QuarticSymbol::Lambda4) / (4.0 * kFourPiSq);
  r.quartic = q.real();
  r.imag_part = q.imag();
  r.value = r.kinetic + r.quartic;
  return r;
}

double modified_energy(const SpectralField& f, const ModifiedEnergyConfig& cfg) {
  return modified_energy_detail(f, cfg).value;
}

double quartic_increment_term(const SpectralField& f, const MultiplierSpec& spec, std::size_t mode_cap) {
  const ModeList modes = collect_modes(f, spec, 0.0, 0.0);
  if (modes.k.size() > mode_cap) {
    throw ComplexityError("quartic increment: " + std::to_string(modes.k.size()) +
                          " modes exceed the cap of " + std::to_string(mode_cap));
  }
  const Complex s = quartic_contraction(f.grid(), modes, spec, QuarticSymbol::Lambda4Tilde);
  // Re(i S) / (4 (2pi)^2)
  return -s.imag() / (4.0 * kFourPiSq);
}

namespace {

/// m^2|zeta|^2 and |zeta| on a box of lattice points, for merged frequencies.
class LatticeTable {
 public:
  LatticeTable(const Grid& g, const MultiplierSpec& spec, int rx, int ry)
      : rx_(rx), ry_(ry), stride_(2 * rx + 1) {
    const std::size_t n = static_cast<std::size_t>(2 * rx + 1) * (2 * ry + 1);
    z_.resize(n);
    w_.resize(n);
    a_.resize(n);
    for (int ky = -ry; ky <= ry; ++ky) {
      for (int kx = -rx; kx <= rx; ++kx) {
        const std::size_t i = slot({kx, ky});
        z_[i] = g.freq(LatticePoint{kx, ky});
        w_[i] = energy_weight(spec, z_[i]);
        a_[i] = z_[i].norm();
      }
    }
  }
  std::size_t slot(const LatticePoint& p) const {
    return static_cast<std::size_t>(p.ky + ry_) * stride_ + static_cast<std::size_t>(p.kx + rx_);
  }
  const Freq& z(std::size_t i) const { return z_[i]; }
  double w(std::size_t i) const { return w_[i]; }
  double a(std::size_t i) const { return a_[i]; }

 private:
  int rx_;
  int ry_;
  std::size_t stride_;
  std::vector<Freq> z_;
  std::vector<double> w_;
  std::vector<double> a_;
};

}  // namespace

double sextic_increment_term(const SpectralField& f, const MultiplierSpec& spec,
                             const std::vector<bool>& retained, std::size_t mode_cap) {
  const Grid& g = f.grid();
  if (!retained.empty() && retained.size() != g.size()) {
    throw std::invalid_argument("sextic increment: retained mask does not match grid");
  }
  const ModeList m = collect_modes(f, spec, 0.0, 0.0);
  const std::size_t n = m.k.size();
  if (n > mode_cap) {
    throw ComplexityError("sextic increment: " + std::to_string(n) + " modes exceed the cap of " +
                          std::to_string(mode_cap));
  }
  if (n == 0) return 0.0;
  auto in_set = [&](const LatticePoint& p) {
    const auto idx = g.index_of(p);
    if (!idx) return false;
    return retained.empty() ? m.lookup[*idx] >= 0 : static_cast<bool>(retained[*idx]);
  };

  int rx = 0, ry = 0;
  for (const auto& p : m.k) {
    rx = std::max(rx, std::abs(p.kx));
    ry = std::max(ry, std::abs(p.ky));
  }
  const LatticeTable tab(g, spec, 3 * rx, 3 * ry);
  const double low = spec.low_cutoff();

  // Lambda4 at four lattice points given by their table slots.
  auto lam = [&](std::size_t s1, std::size_t s2, std::size_t s3, std::size_t s4) {
    const std::array<double, 4> w{tab.w(s1), tab.w(s2), tab.w(s3), tab.w(s4)};
    const std::array<double, 4> a{tab.a(s1), tab.a(s2), tab.a(s3), tab.a(s4)};
    return lambda4_kernel(tab.z(s1), tab.z(s2), tab.z(s4), w, a, low);
  };

  // Slots: u at a, c, e; ubar at -b, -d, -f with f = a + c + e - b - d.
  Complex total{};
  for (std::size_t ia = 0; ia < n; ++ia) {
    const LatticePoint ka = m.k[ia];
    const std::size_t s1 = tab.slot(ka);
    for (std::size_t ib = 0; ib < n; ++ib) {
      const LatticePoint kb = m.k[ib];
      const std::size_t s2 = tab.slot(-kb);
      const Complex c12 = m.c[ia] * std::conj(m.c[ib]);
      for (std::size_t ic = 0; ic < n; ++ic) {
        const LatticePoint kc = m.k[ic];
        const std::size_t s3 = tab.slot(kc);
        const Complex c123 = c12 * m.c[ic];
        const LatticePoint m123 = ka - kb + kc;
        const bool t1_ok = in_set(m123);
        for (std::size_t id = 0; id < n; ++id) {
          const LatticePoint kd = m.k[id];
          const std::size_t s4 = tab.slot(-kd);
          const Complex c1234 = c123 * std::conj(m.c[id]);
          const LatticePoint m234 = kc - kb - kd;
          const bool t2_ok = in_set(-m234);
          for (std::size_t ie = 0; ie < n; ++ie) {
            const LatticePoint ke = m.k[ie];
            const int jf = m.find(g, m123 - kd + ke);
            if (jf < 0) continue;
            const LatticePoint kf = m.k[static_cast<std::size_t>(jf)];
            const std::size_t s5 = tab.slot(ke);
            const std::size_t s6 = tab.slot(-kf);
            double sym = 0.0;
            if (t1_ok) sym += lam(tab.slot(m123), s4, s5, s6);
            if (t2_ok) sym -= lam(s1, tab.slot(m234), s5, s6);
            const LatticePoint m345 = kc - kd + ke;
            if (in_set(m345)) sym += lam(s1, s2, tab.slot(m345), s6);
            const LatticePoint m456 = ke - kd - kf;
            if (in_set(-m456)) sym -= lam(s1, s2, s3, tab.slot(m456));
            if (sym == 0.0) continue;
            total += sym * c1234 * m.c[ie] * std::conj(m.c[static_cast<std::size_t>(jf)]);
          }
        }
      }
    }
  }
  const double w = g.weight();
  const double w5 = w * w * w * w * w;
  // Re(-i S) / (4 (2pi)^4)
  return total.imag() * w5 / (4.0 * kFourPiSq * kFourPiSq);
}

DecompositionRecord energy_derivative_decomposition(const SpaceTimeTrace& trace, std::size_t center,
                                                    const ModifiedEnergyConfig& cfg,
                                                    const DecompositionOptions& opts) {
  if (center == 0 || center + 1 >= trace.size()) {
    throw std::invalid_argument("energy decomposition: need frames on both sides of the center");
  }
  const double h = trace.dt();
  auto ei = [&](std::size_t k) { return modified_energy(trace.frame(k), cfg); };
  DecompositionRecord r;
  r.t = trace.time(center);
  const double e_m1 = ei(center - 1);
  const double e_p1 = ei(center + 1);
  const double d2 = (e_p1 - e_m1) / (2.0 * h);
  if (center >= 2 && center + 2 < trace.size()) {
    const double e_m2 = ei(center - 2);
    const double e_p2 = ei(center + 2);
    r.lhs = (-e_p2 + 8.0 * e_p1 - 8.0 * e_m1 + e_m2) / (12.0 * h);
    r.fd_error = std::abs(r.lhs - d2);
  } else {
    r.lhs = d2;
    r.fd_error = std::abs(d2);
    r.warning = "only one frame on each side; second-order stencil";
  }
  const SpectralField& f = trace.frame(center);
  r.quartic = quartic_increment_term(f, cfg.spec, cfg.mode_cap);
  r.sextic = sextic_increment_term(f, cfg.spec, opts.retained, opts.sextic_mode_cap);
  r.residual = r.lhs - r.quartic - r.sextic;
  const double scale = std::max({std::abs(r.lhs), std::abs(r.quartic) + std::abs(r.sextic), 1e-300});
  if (r.fd_error > opts.fd_tolerance * scale) {
    r.coarse_dt = true;
    if (r.warning.empty()) r.warning = "finite-difference error dominates; reduce the frame spacing";
  }
  return r;
}

namespace {

struct ResolvedWindow {
  std::size_t first;
  std::size_t count;
};

ResolvedWindow resolve(const SpaceTimeTrace& trace, const XsbWindow& w) {
  if (w.first >= trace.size()) throw std::invalid_argument("xsb: window starts after the trace");
  const std::size_t count = w.count == 0 ? trace.size() - w.first : w.count;
  if (w.first + count > trace.size()) throw std::invalid_argument("xsb: window exceeds the trace");
  if (count < 8) throw std::invalid_argument("xsb: window has fewer than 8 samples");
  return {w.first, count};
}

std::vector<double> hann_taper(std::size_t n) {
  std::vector<double> t(n);
  double ms = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sin(std::numbers::pi * (static_cast<double>(k) + 0.5) / static_cast<double>(n));
    t[k] = s * s;
    ms += t[k] * t[k];
  }
  const double norm = std::sqrt(ms / static_cast<double>(n));
  for (auto& v : t) v /= norm;
  return t;
}

/// 1D backward (exp(+i...)) transform of length n, reused across modes.
class TimeTransform {
 public:
  explicit TimeTransform(std::size_t n) : buf_(n), n_(n) {
    std::lock_guard lock(detail::planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), buf_.raw(), buf_.raw(), FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~TimeTransform() {
    std::lock_guard lock(detail::planner_mutex());
    fftw_destroy_plan(plan_);
  }
  TimeTransform(const TimeTransform&) = delete;
  TimeTransform& operator=(const TimeTransform&) = delete;

  std::complex<double>* data() { return buf_.data(); }
  void run() { fftw_execute(plan_); }
  /// Bin j of the output, j in [-n/2, n/2).
  std::complex<double> bin(long j) {
    const long n = static_cast<long>(n_);
    return buf_.data()[((j % n) + n) % n];
  }

 private:
  detail::FftBuffer buf_;
  std::size_t n_;
  fftw_plan plan_;
};

}  // namespace

XsbResult xsb_norm(const SpaceTimeTrace& trace, double s, double b, const XsbWindow& window) {
  const auto [first, count] = resolve(trace, window);
  const Grid& g = trace.grid();
  const double dt = trace.dt();
  const double dsigma = kTwoPi / (static_cast<double>(count) * dt);
  const auto taper = hann_taper(count);
  TimeTransform tt(count);
  // Plancherel: (1/2pi) sum_j dsigma |dt sum_k g_k e^{i sigma_j t_k}|^2 = dt sum_k |g_k|^2.
  const double scale = dt * dt * dsigma / kTwoPi;
  const long half = static_cast<long>(count / 2);
  std::vector<double> weight_b(count);
  double rect = 0.0;
  double hann = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Freq z = g.freq(i);
    const double z2 = z.norm2();
    const double ws = std::pow(1.0 + z2, s);
    for (int pass = 0; pass < 2; ++pass) {
      auto* d = tt.data();
      bool any = false;
      for (std::size_t k = 0; k < count; ++k) {
        const double t = trace.time(first + k);
        const Complex v = trace.frame(first + k)[i] * std::polar(1.0, z2 * t);
        d[k] = pass == 0 ? v : v * taper[k];
        any = any || v != Complex{};
      }
      if (!any) break;
      tt.run();
      double acc = 0.0;
      for (long j = -half; j < static_cast<long>(count) - half; ++j) {
        const double sigma = static_cast<double>(j) * dsigma;
        acc += std::pow(1.0 + sigma * sigma, b) * std::norm(tt.bin(j));
      }
      (pass == 0 ? rect : hann) += ws * acc;
    }
  }
  XsbResult r;
  r.rectangular = std::sqrt(g.weight() * scale * rect);
  r.hann = std::sqrt(g.weight() * scale * hann);
  r.samples = count;
  return r;
}

std::vector<double> mode_time_spectrum(const SpaceTimeTrace& trace, std::size_t mode_index,
                                       const XsbWindow& window) {
  const auto [first, count] = resolve(trace, window);
  if (mode_index >= trace.grid().size()) throw std::out_of_range("mode_time_spectrum: bad mode");
  const double z2 = trace.grid().freq(mode_index).norm2();
  TimeTransform tt(count);
  auto* d = tt.data();
  for (std::size_t k = 0; k < count; ++k) {
    d[k] = trace.frame(first + k)[mode_index] * std::polar(1.0, z2 * trace.time(first + k));
  }
  tt.run();
  const long half = static_cast<long>(count / 2);
  std::vector<double> out;
  out.reserve(count);
  for (long j = -half; j < static_cast<long>(count) - half; ++j) out.push_back(std::abs(tt.bin(j)));
  return out;
}

}  // namespace cylnls
