// estimate_lab.cpp
// Localized random data, the bilinear space-time norm by time quadrature and by
// the pair sum, and the scaling sweeps built on them.

#include "cylnls/estimate_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "cylnls/errors.hpp"
#include "fft_workspace.hpp"

namespace cylnls {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kFourPiSq = 4.0 * kPi * kPi;

double japanese(double x) { return std::sqrt(1.0 + x * x); }

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
  explicit GaussRule(int n) : x(n), w(n) {
    for (int i = 0; i < n; ++i) {
      double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = z;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[i] = z;
      w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

const GaussRule& gauss16() {
  static const GaussRule rule(16);
  return rule;
}

struct Support {
  std::vector<LatticePoint> k;
  std::vector<Freq> z;
  std::vector<Complex> c;
  int kx_min = 0, kx_max = -1, ky_min = 0, ky_max = -1;

  std::size_t size() const { return k.size(); }
};

Support support_of(const SpectralField& f) {
  const Grid& g = f.grid();
  Support s;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (f[i] == Complex{}) continue;
    const auto p = g.lattice(i);
    if (s.k.empty()) {
      s.kx_min = s.kx_max = p.kx;
      s.ky_min = s.ky_max = p.ky;
    }
    s.kx_min = std::min(s.kx_min, p.kx);
    s.kx_max = std::max(s.kx_max, p.kx);
    s.ky_min = std::min(s.ky_min, p.ky);
    s.ky_max = std::max(s.ky_max, p.ky);
    s.k.push_back(p);
    s.z.push_back(g.freq(p));
    s.c.push_back(f[i]);
  }
  return s;
}

int next_pow2(int n) {
  int p = 4;
  while (p < n) p *= 2;
  return p;
}

/// Bound on the spread of the pair phase inside one output frequency, which
/// sets the oscillation rate of ||F(t)||^2.
double phase_bandwidth(const BilinearExperiment& e, const Support& a, const Support& b, double dxi) {
  const double ax0 = a.kx_min * dxi, ax1 = a.kx_max * dxi, bx0 = b.kx_min * dxi, bx1 = b.kx_max * dxi;
  const double ay0 = a.ky_min, ay1 = a.ky_max, by0 = b.ky_min, by1 = b.ky_max;
  if (!is_conjugate(e.variant)) {
    // w = |z|^2/2 + |z1 - z2|^2/2 at fixed z = z1 + z2
    const double dx = std::max(std::abs(ax1 - bx0), std::abs(bx1 - ax0));
    const double dy = std::max(std::abs(ay1 - by0), std::abs(by1 - ay0));
    return 0.5 * (dx * dx + dy * dy);
  }
  // w = z.(z1 - z2); at fixed z the spread is |z| * 2 diam(supp1)
  const double sx = std::max(std::abs(ax0 + bx0), std::abs(ax1 + bx1));
  const double sy = std::max(std::abs(ay0 + by0), std::abs(ay1 + by1));
  const double da = std::hypot(ax1 - ax0, ay1 - ay0);
  const double db = std::hypot(bx1 - bx0, by1 - by0);
  return 2.0 * std::hypot(sx, sy) * std::min(da, db);
}

/// Time quadrature of ||F(t)||^2 on a compact working grid. Sampling a field
/// whose x-support spans fewer than n_w lattice points on n_w points is exact,
/// so the working grid only needs to hold the support of the product.
class ProductQuadrature {
 public:
  ProductQuadrature(const BilinearExperiment& e, const Support& a, const Support& b, const Grid& g,
                    const BilinearOptions& opt)
      : a_(a), b_(b), conj_(is_conjugate(e.variant)),
        work_(g.lx(), next_pow2((a.kx_max - a.kx_min) + (b.kx_max - b.kx_min) + 2),
              next_pow2((a.ky_max - a.ky_min) + (b.ky_max - b.ky_min) + 2)) {
    if (work_.size() > opt.max_working_points) {
      throw ComplexityError("bilinear quadrature: working grid of " + std::to_string(work_.size()) +
                            " points exceeds the cap");
    }
    // group modes of the first factor by their admissible partner set
    std::map<std::vector<bool>, std::size_t> key_to_group;
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::vector<bool> key(b.size());
      bool any = false;
      for (std::size_t j = 0; j < b.size(); ++j) {
        key[j] = pair_admissible(e, a.z[i], b.z[j]);
        any = any || key[j];
      }
      if (!any) continue;
      auto [it, inserted] = key_to_group.try_emplace(key, groups_.size());
      if (inserted) {
        groups_.push_back({});
        for (std::size_t j = 0; j < b.size(); ++j) {
          if (key[j]) groups_.back().second.push_back(j);
        }
      }
      groups_[it->second].first.push_back(i);
    }
    if (groups_.size() > opt.max_groups) {
      throw ComplexityError("bilinear quadrature: the indicator splits the first factor into " +
                            std::to_string(groups_.size()) + " groups; use the pair sum");
    }
    bandwidth_ = std::max(1.0, phase_bandwidth(e, a, b, g.dxi()));
    max_nodes_ = opt.max_nodes;
    ws_ = std::make_unique<detail::FftWorkspace>(work_);
    pos_a_ = place(a);
    pos_b_ = place(b);
    wa_.resize(a.size());
    wb_.resize(b.size());
    for (std::size_t i = 0; i < a.size(); ++i) wa_[i] = a.z[i].norm2();
    for (std::size_t j = 0; j < b.size(); ++j) wb_[j] = b.z[j].norm2();
    spec_.assign(work_.size(), Complex{});
    fa_.resize(work_.size());
    fb_.resize(work_.size());
    acc_.resize(work_.size());
  }

  std::size_t groups() const { return groups_.size(); }
  std::size_t nodes() const { return nodes_; }

  /// int_a^b ||F(t)||^2 dt, composite 16-point Gauss-Legendre.
  double integrate(double lo, double hi) {
    if (hi <= lo || groups_.empty()) return 0.0;
    const auto panels = static_cast<std::size_t>(std::ceil((hi - lo) * bandwidth_ / 8.0)) + 1;
    const auto& rule = gauss16();
    if (nodes_ + panels * rule.x.size() > max_nodes_) {
      throw ComplexityError("bilinear quadrature: more than " + std::to_string(max_nodes_) +
                            " time nodes needed; shrink the window or use the pair sum");
    }
    const double h = (hi - lo) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = lo + (p + 0.5) * h;
      double part = 0.0;
      for (std::size_t q = 0; q < rule.x.size(); ++q) part += rule.w[q] * integrand(mid + 0.5 * h * rule.x[q]);
      total += 0.5 * h * part;
    }
    return total;
  }

  /// ||F(t)||^2 over the box.
  double integrand(double t) {
    ++nodes_;
    std::fill(acc_.begin(), acc_.end(), Complex{});
    for (const auto& [ia, ib] : groups_) {
      fill(ia, a_, pos_a_, wa_, -t, fa_);
      fill(ib, b_, pos_b_, wb_, conj_ ? t : -t, fb_);
      for (std::size_t i = 0; i < acc_.size(); ++i) acc_[i] += fa_[i] * fb_[i];
    }
    double s = 0.0;
    for (const auto& v : acc_) s += std::norm(v);
    return kFourPiSq * kFourPiSq * s * work_.dx() * work_.dy();
  }

 private:
  std::vector<std::size_t> place(const Support& s) const {
    std::vector<std::size_t> pos(s.size());
    const int nx = work_.nx();
    const int ny = work_.ny();
    for (std::size_t i = 0; i < s.size(); ++i) {
      // wrap into the centered range of the working grid
      const int kx = ((s.k[i].kx % nx) + nx + nx / 2) % nx - nx / 2;
      const int ky = ((s.k[i].ky % ny) + ny + ny / 2) % ny - ny / 2;
      pos[i] = *work_.index_of({kx, ky});
    }
    return pos;
  }

  void fill(const std::vector<std::size_t>& ids, const Support& s, const std::vector<std::size_t>& pos,
            const std::vector<double>& w2, double tt, std::vector<Complex>& out) {
    for (std::size_t i : ids) spec_[pos[i]] = s.c[i] * std::polar(1.0, w2[i] * tt);
    ws_->inverse(spec_, out);
    for (std::size_t i : ids) spec_[pos[i]] = Complex{};
  }

  const Support& a_;
  const Support& b_;
  bool conj_;
  Grid work_;
  std::unique_ptr<detail::FftWorkspace> ws_;
  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> groups_;
  std::vector<std::size_t> pos_a_, pos_b_;
  std::vector<double> wa_, wb_;
  std::vector<Complex> spec_, fa_, fb_, acc_;
  double bandwidth_ = 1.0;
  std::size_t nodes_ = 0;
  std::size_t max_nodes_ = 0;
};

/// Pair buckets keyed by the output frequency z1 + z2.
struct PairBuckets {
  std::vector<std::vector<std::pair<double, Complex>>> buckets;
  double terms = 0.0;  // sum of squared bucket sizes
  double diagonal = 0.0;
};

PairBuckets bucket_pairs(const BilinearExperiment& e, const Support& a, const Support& b,
                         const BilinearOptions& opt) {
  if (a.size() > opt.max_modes || b.size() > opt.max_modes) {
    throw ComplexityError("pair sum: supports of " + std::to_string(a.size()) + " and " +
                          std::to_string(b.size()) + " modes exceed the cap of " + std::to_string(opt.max_modes));
  }
  std::unordered_map<std::int64_t, std::size_t> index;
  PairBuckets out;
  std::size_t stored = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (!pair_admissible(e, a.z[i], b.z[j])) continue;
      const std::int64_t key = (static_cast<std::int64_t>(a.k[i].kx + b.k[j].kx) << 32) +
                               static_cast<std::int64_t>(a.k[i].ky + b.k[j].ky);
      auto [it, inserted] = index.try_emplace(key, out.buckets.size());
      if (inserted) out.buckets.emplace_back();
      const Complex c = a.c[i] * b.c[j];
      out.buckets[it->second].emplace_back(pair_phase(e, a.z[i], b.z[j]), c);
      out.diagonal += std::norm(c);
      if (++stored > opt.max_pairs) {
        throw ComplexityError("pair sum: more than " + std::to_string(opt.max_pairs) + " admissible pairs");
      }
    }
  }
  for (const auto& bk : out.buckets) out.terms += static_cast<double>(bk.size()) * bk.size();
  if (out.terms > opt.max_pair_terms) {
    throw ComplexityError("pair sum: " + std::to_string(out.terms) + " quadruple terms exceed the cap");
  }
  return out;
}

/// sum_z sum_{p,q} c_p conj(c_q) 2 sin(dw T)/dw for T = t0 * 2^j, j < count.
std::vector<double> pair_sums_doubling(const PairBuckets& pb, double t0, std::size_t count) {
  std::vector<double> out(count, 0.0);
  std::vector<double> s(count), c(count);
  for (const auto& bk : pb.buckets) {
    for (std::size_t p = 0; p < bk.size(); ++p) {
      const double diag = std::norm(bk[p].second);
      for (std::size_t j = 0; j < count; ++j) out[j] += diag * 2.0 * t0 * std::ldexp(1.0, static_cast<int>(j));
      for (std::size_t q = p + 1; q < bk.size(); ++q) {
        const double dw = bk[p].first - bk[q].first;
        const double re = 2.0 * (bk[p].second * std::conj(bk[q].second)).real();
        if (dw == 0.0) {
          for (std::size_t j = 0; j < count; ++j) out[j] += re * 2.0 * t0 * std::ldexp(1.0, static_cast<int>(j));
          continue;
        }
        double sn = std::sin(dw * t0);
        double cs = std::cos(dw * t0);
        for (std::size_t j = 0; j < count; ++j) {
          out[j] += re * 2.0 * sn / dw;
          const double s2 = 2.0 * sn * cs;
          cs = 1.0 - 2.0 * sn * sn;
          sn = s2;
        }
      }
    }
  }
  return out;
}

/// Largest |xi1 -+ xi2| over the bounding boxes: half the fastest relative
/// x-velocity between the two factors.
double max_relative_xi(const BilinearExperiment& e, const Support& a, const Support& b, double dxi) {
  const double ax0 = a.kx_min * dxi, ax1 = a.kx_max * dxi, bx0 = b.kx_min * dxi, bx1 = b.kx_max * dxi;
  if (is_conjugate(e.variant)) return std::max(std::abs(ax0 + bx0), std::abs(ax1 + bx1));
  return std::max(std::abs(ax1 - bx0), std::abs(bx1 - ax0));
}

/// Windows T_max / 2^j, j = J..0. The fastest pair comes back around the box
/// at t = L / (2 max|dxi|), so T_max stops at half that. Short windows start at
/// the packet crossing time localize / (2M).
std::vector<double> window_chain(const BilinearExperiment& e, const Support& a, const Support& b, const Grid& g,
                                 const BilinearOptions& opt) {
  const double rel = std::max(max_relative_xi(e, a, b, g.dxi()), std::max(e.m, 1.0));
  const double t_max = opt.t_max > 0.0 ? opt.t_max : g.lx() / (4.0 * rel);
  std::vector<double> out;
  if (opt.t_initial > 0.0) {
    for (double t = opt.t_initial; t <= t_max * (1.0 + 1e-12); t *= 2.0) out.push_back(t);
    if (out.empty()) out.push_back(t_max);
    return out;
  }
  const double t0 = 0.5 * std::max(e.localize, 0.5) / std::max(e.m, 1.0);
  const int levels = std::max(2, static_cast<int>(std::ceil(std::log2(t_max / t0))));
  for (int j = levels; j >= 0; --j) out.push_back(std::ldexp(t_max, -j));
  return out;
}

void check_same_grid(const SpectralField& a, const SpectralField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("bilinear norm: factors live on different grids");
}

}  // namespace

const char* variant_name(BilinearVariant v) {
  switch (v) {
    case BilinearVariant::Separation: return "separation";
    case BilinearVariant::Angular: return "angular";
    case BilinearVariant::ConjugateSector: return "conjugate_sector";
    case BilinearVariant::ConjugateSeparation: return "conjugate_separation";
    case BilinearVariant::EqualBandL4: return "equal_band_L4";
  }
  return "?";
}

BilinearVariant parse_variant(const std::string& name) {
  for (auto v : {BilinearVariant::Separation, BilinearVariant::Angular, BilinearVariant::ConjugateSector,
                 BilinearVariant::ConjugateSeparation, BilinearVariant::EqualBandL4}) {
    if (name == variant_name(v)) return v;
  }
  throw std::invalid_argument("unknown bilinear variant '" + name +
                              "' (separation, angular, conjugate_sector, conjugate_separation, equal_band_L4)");
}

bool is_conjugate(BilinearVariant v) {
  return v == BilinearVariant::ConjugateSector || v == BilinearVariant::ConjugateSeparation;
}

void BilinearExperiment::validate() const {
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument(std::string("experiment ") + variant_name(variant) + ": " + msg);
  };
  if (!(n1 > 1.0) || !(n2 > 1.0)) fail("band centers must exceed 1");
  if (variant == BilinearVariant::EqualBandL4) {
    if (!(t_window > 0.0)) fail("needs a fixed t_window > 0 (the L^4 integral grows like log T)");
  } else {
    if (!(m > 1.0)) fail("M must exceed 1");
    if (!(t_window >= 0.0)) fail("t_window must be >= 0");
  }
  if (variant == BilinearVariant::Separation || variant == BilinearVariant::Angular) {
    if (n1 > n2) fail("needs N1 <= N2");
  }
  if (variant == BilinearVariant::Angular || variant == BilinearVariant::ConjugateSector) {
    if (!(theta > 0.0 && theta < 1.0)) fail("theta must lie in (0, 1)");
  }
  if (variant == BilinearVariant::ConjugateSector) {
    if (ell < 0 || ell >= sector_count(theta)) fail("sector index out of range");
  }
  if (trials == 0) fail("trials must be positive");
  if (!(localize >= 0.0)) fail("localize must be >= 0");
  if (!(slab > 0.0)) fail("slab must be positive");
  if (eta_window < 0) fail("eta_window must be >= 0");
}

bool pair_admissible(const BilinearExperiment& e, const Freq& z1, const Freq& z2) {
  switch (e.variant) {
    case BilinearVariant::Separation:
      return std::abs(z1.xi - z2.xi) >= e.m;
    case BilinearVariant::Angular: {
      if (std::abs(z1.xi - z2.xi) < e.m) return false;
      const double n = z1.norm() * z2.norm();
      return n > 0.0 && std::abs(z1.dot(z2)) <= e.theta * n;
    }
    case BilinearVariant::ConjugateSector:
      return std::abs(z1.xi + z2.xi) >= e.m && AngularSector{e.theta, e.ell}.contains(z2);
    case BilinearVariant::ConjugateSeparation:
      return std::abs(z1.xi + z2.xi) >= e.m;
    case BilinearVariant::EqualBandL4:
      return true;
  }
  return false;
}

double pair_phase(const BilinearExperiment& e, const Freq& z1, const Freq& z2) {
  return is_conjugate(e.variant) ? z1.norm2() - z2.norm2() : z1.norm2() + z2.norm2();
}

double bound_formula(const BilinearExperiment& e) {
  switch (e.variant) {
    case BilinearVariant::Separation:
    case BilinearVariant::ConjugateSeparation:
      return std::sqrt(e.n1 / e.m);
    case BilinearVariant::Angular:
      return std::sqrt(japanese(e.theta * e.n2) / e.m);
    case BilinearVariant::ConjugateSector:
      return std::sqrt(japanese(e.theta * (e.n1 + e.n2)) / e.m);
    case BilinearVariant::EqualBandL4:
      return 1.0;
  }
  return 1.0;
}

SpectralField make_localized_data(const Grid& g, const DyadicBand& band, const DataConstraints& c,
                                  std::uint64_t seed) {
  const double res = std::min(g.dxi(), 1.0);
  if (c.sector && c.sector->theta * band.center < res) {
    throw std::invalid_argument("localized data: sector width theta*N = " +
                                std::to_string(c.sector->theta * band.center) +
                                " is below the lattice resolution " + std::to_string(res));
  }
  if (c.xi_min && c.xi_max && *c.xi_max - *c.xi_min < g.dxi()) {
    throw std::invalid_argument("localized data: xi window narrower than the lattice spacing " +
                                std::to_string(g.dxi()));
  }
  if (c.localize < 0.0) throw std::invalid_argument("localized data: localize must be >= 0");

  std::vector<bool> adm(g.size(), false);
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g.is_nyquist(i)) continue;
    const Freq z = g.freq(i);
    if (!band.contains(z.norm())) continue;
    if (c.sector && !c.sector->contains(z)) continue;
    if (c.xi_min && z.xi < *c.xi_min) continue;
    if (c.xi_max && z.xi >= *c.xi_max) continue;
    const int ky = g.lattice(i).ky;
    if (c.eta_min && ky < *c.eta_min) continue;
    if (c.eta_max && ky > *c.eta_max) continue;
    adm[i] = true;
    ++count;
  }
  if (count == 0) {
    std::string why = "band N=" + std::to_string(band.center);
    if (c.sector) why += ", sector theta=" + std::to_string(c.sector->theta) + " l=" + std::to_string(c.sector->index);
    if (c.xi_min || c.xi_max) why += ", xi window";
    if (c.eta_min || c.eta_max) why += ", eta window";
    throw std::invalid_argument("localized data: no lattice point satisfies " + why +
                                " on this grid (check L_x, n_x, n_y)");
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
  std::vector<Complex> white(g.size());
  for (auto& v : white) {
    const double re = nd(rng);
    const double im = nd(rng);
    v = {re, im};
  }
  SpectralField f(g);
  if (c.localize > 0.0) {
    // multiplication by exp(-x^2/(2 s^2)) is a Gaussian convolution in xi
    const double s = c.localize * g.dxi();
    const int r = static_cast<int>(std::ceil(6.0 / s));
    std::vector<double> kern(2 * r + 1);
    for (int j = -r; j <= r; ++j) kern[j + r] = std::exp(-0.5 * s * s * j * j);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!adm[i]) continue;
      const int ix = g.ix_of(i);
      const int iy = g.iy_of(i);
      Complex acc{};
      for (int j = std::max(-r, -ix); j <= std::min(r, g.nx() - 1 - ix); ++j) {
        acc += kern[j + r] * white[g.index(ix + j, iy)];
      }
      f[i] = acc;
    }
    // taper toward the edges of each admissible xi-run so the support cut
    // does not leave sinc tails in x
    const int edge = static_cast<int>(std::ceil(2.0 / s));
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!adm[i]) continue;
      const int ix = g.ix_of(i);
      const int iy = g.iy_of(i);
      int d = 1;
      while (d < edge && ix - d >= 0 && ix + d < g.nx() && adm[g.index(ix - d, iy)] && adm[g.index(ix + d, iy)]) ++d;
      const double ramp = std::sin(0.5 * kPi * d / edge);
      f[i] *= ramp * ramp;
    }
  } else {
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (adm[i]) f[i] = white[i];
    }
  }
  const double n = std::sqrt(l2_norm_squared(f));
  if (!(n > 0.0)) throw std::invalid_argument("localized data: degenerate draw");
  for (auto& v : f.coeffs()) v /= n;
  return f;
}

BilinearResult bilinear_norm(const BilinearExperiment& e, const SpectralField& phi1, const SpectralField& phi2,
                             const BilinearOptions& opt) {
  e.validate();
  check_same_grid(phi1, phi2);
  const Grid& g = phi1.grid();
  const Support a = support_of(phi1);
  const Support b = support_of(phi2);
  BilinearResult r;
  r.method = "quadrature";
  if (a.size() == 0 || b.size() == 0) return r;
  ProductQuadrature q(e, a, b, g, opt);
  r.groups = q.groups();
  if (e.t_window > 0.0) {
    r.t = e.t_window;
    r.norm = std::sqrt(std::max(0.0, q.integrate(-r.t, r.t)));
    r.nodes = q.nodes();
    return r;
  }
  const auto chain = window_chain(e, a, b, g, opt);
  double t = chain.front();
  double v = q.integrate(-t, t);
  r.reliable = false;
  r.tail = 1.0;
  for (std::size_t j = 1; j < chain.size(); ++j) {
    const double t2 = chain[j];
    const double v2 = v + q.integrate(t, t2) + q.integrate(-t2, -t);
    r.tail = v2 > 0.0 ? (v2 - v) / v2 : 0.0;
    v = v2;
    t = t2;
    if (r.tail <= opt.tail_tolerance) {
      r.reliable = true;
      break;
    }
  }
  r.t = t;
  r.norm = std::sqrt(std::max(0.0, v));
  r.nodes = q.nodes();
  return r;
}

PairSumSeries pair_sum_series(const BilinearExperiment& e, const SpectralField& phi1, const SpectralField& phi2,
                              const std::vector<double>& windows, const BilinearOptions& opt) {
  check_same_grid(phi1, phi2);
  const Grid& g = phi1.grid();
  const Support a = support_of(phi1);
  const Support b = support_of(phi2);
  const PairBuckets pb = bucket_pairs(e, a, b, opt);
  const double box = g.area() * std::pow(g.weight(), 4);
  PairSumSeries out;
  out.t = windows;
  out.diagonal_rate = box * pb.diagonal;
  for (double t : windows) {
    if (!(t > 0.0)) throw std::invalid_argument("pair sum: windows must be positive");
    out.norm2.push_back(box * pair_sums_doubling(pb, t, 1)[0]);
  }
  return out;
}

BilinearResult bilinear_norm_oracle(const BilinearExperiment& e, const SpectralField& phi1,
                                    const SpectralField& phi2, const BilinearOptions& opt) {
  e.validate();
  check_same_grid(phi1, phi2);
  const Grid& g = phi1.grid();
  const Support a = support_of(phi1);
  const Support b = support_of(phi2);
  BilinearResult r;
  r.method = "pair-sum";
  if (a.size() == 0 || b.size() == 0) return r;
  const PairBuckets pb = bucket_pairs(e, a, b, opt);
  const double box = g.area() * std::pow(g.weight(), 4);
  if (e.t_window > 0.0) {
    r.t = e.t_window;
    r.norm = std::sqrt(std::max(0.0, box * pair_sums_doubling(pb, r.t, 1)[0]));
    return r;
  }
  const auto chain = window_chain(e, a, b, g, opt);
  const double t0 = chain.front();
  const std::size_t count = chain.size();
  const auto sums = pair_sums_doubling(pb, t0, count);
  r.reliable = false;
  r.tail = 1.0;
  std::size_t pick = 0;
  for (std::size_t j = 1; j < count; ++j) {
    pick = j;
    r.tail = sums[j] > 0.0 ? (sums[j] - sums[j - 1]) / sums[j] : 0.0;
    if (r.tail <= opt.tail_tolerance) {
      r.reliable = true;
      break;
    }
  }
  r.t = t0 * std::ldexp(1.0, static_cast<int>(pick));
  r.norm = std::sqrt(std::max(0.0, box * sums[pick]));
  return r;
}

double l4_norm(const SpectralField& phi, double t_window, const BilinearOptions& opt) {
  BilinearExperiment e;
  e.variant = BilinearVariant::EqualBandL4;
  e.t_window = t_window;
  const double f = bilinear_norm(e, phi, phi, opt).norm;  // (2pi)^2 ||u^2||
  return std::sqrt(f) / (2.0 * kPi);
}

const char* axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::M: return "M";
    case SweepAxis::Theta: return "theta";
    case SweepAxis::N1: return "N1";
    case SweepAxis::N2: return "N2";
    case SweepAxis::N0: return "N0";
    case SweepAxis::Ell: return "ell";
  }
  return "?";
}

SweepAxis parse_axis(const std::string& name) {
  for (auto a : {SweepAxis::M, SweepAxis::Theta, SweepAxis::N1, SweepAxis::N2, SweepAxis::N0, SweepAxis::Ell}) {
    if (name == axis_name(a)) return a;
  }
  throw std::invalid_argument("unknown sweep axis '" + name + "' (M, theta, N1, N2, N0, ell)");
}

const char* method_name(NormMethod m) {
  switch (m) {
    case NormMethod::Quadrature: return "quadrature";
    case NormMethod::PairSum: return "pair-sum";
    case NormMethod::Auto: return "auto";
  }
  return "?";
}

NormMethod parse_method(const std::string& name) {
  for (auto m : {NormMethod::Quadrature, NormMethod::PairSum, NormMethod::Auto}) {
    if (name == method_name(m)) return m;
  }
  throw std::invalid_argument("unknown norm method '" + name + "' (quadrature, pair-sum, auto)");
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y, std::size_t min_points) {
  LineFit f;
  const std::size_t n = x.size();
  if (n != y.size() || n < std::max<std::size_t>(min_points, 2)) return f;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = y[i] - (f.slope * x[i] + f.intercept);
    rss += d * d;
  }
  f.residual = std::sqrt(rss / n);
  f.valid = true;
  return f;
}

namespace {

/// Smallest eta >= 0 at which a slab [x0, x1) meets the band annulus.
int eta_floor(double n, double x0, double x1) {
  const double far = std::max(std::abs(x0), std::abs(x1));
  return static_cast<int>(std::ceil(std::sqrt(std::max(0.0, n * n - far * far))));
}

struct Layout {
  DyadicBand band1, band2;
  DataConstraints c1, c2;
};

Layout layout_for(const BilinearExperiment& e) {
  Layout l;
  l.band1 = {e.n1};
  l.band2 = {e.n2};
  l.c1.localize = e.localize;
  l.c2.localize = e.localize;
  auto eta_window = [&](DataConstraints& c, double n, double x0, double x1) {
    if (e.eta_window <= 0) return;
    const int e0 = eta_floor(n, x0, x1);
    c.eta_min = e0;
    c.eta_max = e0 + e.eta_window - 1;
  };
  const double h = 0.5 * e.m;
  switch (e.variant) {
    case BilinearVariant::Separation:
      // slabs on either side of a gap of exactly M
      l.c1.xi_min = -h - e.slab;
      l.c1.xi_max = -h;
      l.c2.xi_min = h;
      l.c2.xi_max = h + e.slab;
      eta_window(l.c1, e.n1, -h - e.slab, -h);
      eta_window(l.c2, e.n2, h, h + e.slab);
      break;
    case BilinearVariant::ConjugateSeparation:
      l.c1.xi_min = h;
      l.c1.xi_max = h + e.slab;
      l.c2.xi_min = h;
      l.c2.xi_max = h + e.slab;
      eta_window(l.c1, e.n1, h, h + e.slab);
      eta_window(l.c2, e.n2, h, h + e.slab);
      break;
    case BilinearVariant::Angular:
      // first factor along the xi axis, second in the sector through pi/2
      l.c1.sector = AngularSector{e.theta, 0};
      l.c2.sector = AngularSector{e.theta, static_cast<int>(std::floor(0.5 * kPi / e.theta))};
      break;
    case BilinearVariant::ConjugateSector:
      l.c2.sector = AngularSector{e.theta, e.ell};
      break;
    case BilinearVariant::EqualBandL4:
      l.c1.xi_min = 0.0;
      if (e.eta_window > 0) {
        l.c1.eta_min = 0;
        l.c1.eta_max = e.eta_window - 1;
      }
      l.band2 = l.band1;
      l.c2 = l.c1;
      break;
  }
  return l;
}

BilinearExperiment at_axis(const BilinearExperiment& base, SweepAxis axis, double v) {
  BilinearExperiment e = base;
  switch (axis) {
    case SweepAxis::M: e.m = v; break;
    case SweepAxis::Theta: e.theta = v; break;
    case SweepAxis::N1: e.n1 = v; break;
    case SweepAxis::N2: e.n2 = v; break;
    case SweepAxis::N0: e.n1 = v; e.n2 = v; break;
    case SweepAxis::Ell: e.ell = static_cast<int>(std::lround(v)); break;
  }
  return e;
}

void extend_box(const DyadicBand& band, const DataConstraints& c, double& xi_max, int& eta_max) {
  double hi = 2.0 * band.center;
  if (c.xi_min) hi = std::min(hi, std::max(std::abs(*c.xi_min), std::abs(c.xi_max.value_or(hi))));
  xi_max = std::max(xi_max, hi);
  int eh = static_cast<int>(std::ceil(2.0 * band.center));
  if (c.eta_max) eh = std::min(eh, std::max(std::abs(*c.eta_max), std::abs(c.eta_min.value_or(0))));
  eta_max = std::max(eta_max, eh);
}

}  // namespace

std::pair<SpectralField, SpectralField> sweep_data(const Grid& g, const BilinearExperiment& e, std::size_t trial) {
  const Layout l = layout_for(e);
  const std::uint64_t s1 = splitmix(e.seed * 0x100000001b3ULL + 2 * trial + 1);
  const std::uint64_t s2 = splitmix(e.seed * 0x100000001b3ULL + 2 * trial + 2);
  SpectralField a = make_localized_data(g, l.band1, l.c1, s1);
  if (e.variant == BilinearVariant::EqualBandL4) return {a, a};
  return {std::move(a), make_localized_data(g, l.band2, l.c2, s2)};
}

Grid sweep_grid(const SweepSpec& s, double lx) {
  if (!(lx > 0.0)) throw std::invalid_argument("sweep grid: L_x must be positive");
  double xi_max = 0.0;
  int eta_max = 0;
  for (double v : s.values) {
    const BilinearExperiment e = at_axis(s.base, s.axis, v);
    const Layout l = layout_for(e);
    extend_box(l.band1, l.c1, xi_max, eta_max);
    extend_box(l.band2, l.c2, xi_max, eta_max);
  }
  const double dxi = 2.0 * kPi / lx;
  const int nx = 2 * (static_cast<int>(std::ceil(xi_max / dxi)) + 2);
  const int ny = 2 * (eta_max + 2);
  return Grid(lx, nx, ny);
}

ExperimentReport scaling_sweep(const Grid& g, const SweepSpec& s, std::size_t jobs) {
  s.base.validate();
  if (s.values.empty()) throw std::invalid_argument("sweep: no axis values");
  for (double v : s.values) at_axis(s.base, s.axis, v).validate();
  ExperimentReport rep;
  rep.base = s.base;
  rep.axis = s.axis;
  const std::size_t trials = s.base.trials;
  const std::size_t tasks = s.values.size() * trials;
  rep.rows.resize(tasks);
  std::vector<std::pair<int, std::string>> errors(tasks);  // category, message

  auto run = [&](std::size_t task) {
    const std::size_t iv = task / trials;
    const std::size_t tr = task % trials;
    const BilinearExperiment e = at_axis(s.base, s.axis, s.values[iv]);
    TrialRow row;
    row.axis_value = s.values[iv];
    row.trial = tr;
    row.bound = bound_formula(e);
    const auto [p1, p2] = sweep_data(g, e, tr);
    auto eval = [&](const BilinearExperiment& ex) {
      NormMethod m = s.method;
      if (m == NormMethod::Auto) {
        try {
          return bilinear_norm_oracle(ex, p1, p2, s.options);
        } catch (const ComplexityError&) {
          m = NormMethod::Quadrature;
        }
      }
      return m == NormMethod::PairSum ? bilinear_norm_oracle(ex, p1, p2, s.options)
                                      : bilinear_norm(ex, p1, p2, s.options);
    };
    const BilinearResult r = eval(e);
    row.method = r.method;
    row.t_star = r.t;
    row.tail = r.tail;
    row.reliable = r.reliable;
    if (e.variant == BilinearVariant::EqualBandL4) {
      row.norm = std::sqrt(r.norm) / (2.0 * kPi);
      row.data_norm = std::sqrt(l2_norm_squared(p1));
    } else {
      row.norm = r.norm;
      row.data_norm = std::sqrt(l2_norm_squared(p1) * l2_norm_squared(p2));
    }
    row.ratio = row.norm / (row.bound * row.data_norm);
    if (s.compare_unrefined && e.variant == BilinearVariant::Angular) {
      BilinearExperiment plain = e;
      plain.variant = BilinearVariant::Separation;
      row.unrefined_norm = eval(plain).norm;
    }
    rep.rows[task] = row;
  };

  const std::size_t nthreads = std::max<std::size_t>(1, std::min(jobs, tasks));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks; t = next++) {
      try {
        run(t);
      } catch (const ComplexityError& ex) {
        errors[t] = {1, ex.what()};
      } catch (const NumericalError& ex) {
        errors[t] = {2, ex.what()};
      } catch (const std::exception& ex) {
        errors[t] = {3, ex.what()};
      }
    }
  };
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  // rethrow the first failure with its original category
  for (std::size_t u = 0; u < tasks; ++u) {
    if (errors[u].first == 0) continue;
    const std::string msg = "sweep value " + std::to_string(s.values[u / trials]) + ", trial " +
                            std::to_string(u % trials) + ": " + errors[u].second;
    if (errors[u].first == 1) throw ComplexityError(msg);
    if (errors[u].first == 2) throw NumericalError(msg);
    throw std::invalid_argument(msg);
  }

  std::vector<double> lx, ln, lr;
  for (std::size_t iv = 0; iv < s.values.size(); ++iv) {
    const BilinearExperiment e = at_axis(s.base, s.axis, s.values[iv]);
    AxisSummary a;
    a.axis_value = s.values[iv];
    a.bound = bound_formula(e);
    if (e.variant == BilinearVariant::Angular) a.unrefined_bound = std::sqrt(e.n1 / e.m);
    for (std::size_t tr = 0; tr < trials; ++tr) {
      const auto& row = rep.rows[iv * trials + tr];
      a.max_norm = std::max(a.max_norm, row.norm);
      a.max_ratio = std::max(a.max_ratio, row.ratio);
      a.max_unrefined_norm = std::max(a.max_unrefined_norm, row.unrefined_norm);
      rep.t_star_max = std::max(rep.t_star_max, row.t_star);
      if (!row.reliable) ++rep.unreliable;
    }
    rep.c_max = std::max(rep.c_max, a.max_ratio);
    rep.summary.push_back(a);
    const double x = s.axis == SweepAxis::Ell ? e.ell * e.theta / (2.0 * kPi) : std::log(s.values[iv]);
    lx.push_back(x);
    ln.push_back(std::log(a.max_norm));
    lr.push_back(std::log(a.max_ratio));
  }
  rep.norm_fit = fit_line(lx, ln);
  rep.ratio_fit = fit_line(lx, lr);
  if (s.values.size() < 4) rep.warnings.push_back("fewer than 4 axis points: no slope fitted");
  if (rep.unreliable > 0) {
    rep.warnings.push_back(std::to_string(rep.unreliable) +
                           " trial(s) did not reach the tail tolerance before the wrap-around time");
  }
  return rep;
}

}  // namespace cylnls
