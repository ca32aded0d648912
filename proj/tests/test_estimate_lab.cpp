#include <doctest.h>

#include <cmath>
#include <random>

#include "cylnls/errors.hpp"
#include "cylnls/estimate_lab.hpp"
#include "oracles.hpp"

using namespace cylnls;

namespace {

constexpr double kPi = oracle::pi;

struct Pair {
  LatticePoint sum;
  double w;
  Complex c;
};

std::vector<Pair> admissible_pairs(const BilinearExperiment& e, const SpectralField& a, const SpectralField& b) {
  const Grid& g = a.grid();
  std::vector<Pair> out;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (a[i] == Complex{}) continue;
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (b[j] == Complex{}) continue;
      const Freq z1 = g.freq(i);
      const Freq z2 = g.freq(j);
      if (!pair_admissible(e, z1, z2)) continue;
      const double w = is_conjugate(e.variant) ? z1.norm2() - z2.norm2() : z1.norm2() + z2.norm2();
      out.push_back({g.lattice(i) + g.lattice(j), w, a[i] * b[j]});
    }
  }
  return out;
}

// ||F||^2 on [-T, T] x box by the naive quadruple sum with the exact time kernel.
double naive_norm2(const BilinearExperiment& e, const SpectralField& a, const SpectralField& b, double t) {
  const Grid& g = a.grid();
  const auto pairs = admissible_pairs(e, a, b);
  double acc = 0;
  for (const auto& p : pairs) {
    for (const auto& q : pairs) {
      if (!(p.sum == q.sum)) continue;
      const double dw = p.w - q.w;
      const double k = dw == 0.0 ? 2 * t : 2 * std::sin(dw * t) / dw;
      acc += (p.c * std::conj(q.c)).real() * k;
    }
  }
  return acc * g.area() * std::pow(g.weight(), 4);
}

// T -> infinity rate: only pairs with equal phase survive.
double resonant_rate(const BilinearExperiment& e, const SpectralField& a, const SpectralField& b) {
  const Grid& g = a.grid();
  const auto pairs = admissible_pairs(e, a, b);
  double acc = 0;
  for (const auto& p : pairs) {
    for (const auto& q : pairs) {
      if (p.sum == q.sum && p.w == q.w) acc += (p.c * std::conj(q.c)).real();
    }
  }
  return acc * g.area() * std::pow(g.weight(), 4);
}

SpectralField random_support(const Grid& g, const std::vector<LatticePoint>& pts, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  SpectralField f(g);
  for (const auto& p : pts) {
    const double re = nd(rng);
    const double im = nd(rng);
    f.at(p) = {re, im};
  }
  return f;
}

BilinearExperiment windowed(BilinearVariant v, double t) {
  BilinearExperiment e;
  e.variant = v;
  e.n1 = 4;
  e.n2 = 4;
  e.m = 2;
  e.theta = 0.5;
  e.t_window = t;
  return e;
}

}  // namespace

TEST_CASE("variant, axis and method names round-trip") {
  for (auto v : {BilinearVariant::Separation, BilinearVariant::Angular, BilinearVariant::ConjugateSector,
                 BilinearVariant::ConjugateSeparation, BilinearVariant::EqualBandL4}) {
    CHECK(parse_variant(variant_name(v)) == v);
  }
  for (auto a : {SweepAxis::M, SweepAxis::Theta, SweepAxis::N1, SweepAxis::N2, SweepAxis::N0, SweepAxis::Ell}) {
    CHECK(parse_axis(axis_name(a)) == a);
  }
  CHECK(parse_method("pair-sum") == NormMethod::PairSum);
  CHECK_THROWS_AS(parse_variant("bogus"), std::invalid_argument);
}

TEST_CASE("experiment validation rejects broken hypotheses") {
  BilinearExperiment e;
  e.variant = BilinearVariant::EqualBandL4;
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);  // needs a window
  e.t_window = 1.0;
  CHECK_NOTHROW(e.validate());
  e = {};
  e.n1 = 64;
  e.n2 = 32;
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);
  e = {};
  e.variant = BilinearVariant::ConjugateSector;
  e.theta = 0.25;
  e.ell = sector_count(0.25);
  CHECK_THROWS_AS(e.validate(), std::invalid_argument);
}

TEST_CASE("localized data sits in the requested set with unit norm") {
  const Grid g(8 * kPi, 256, 64);
  DataConstraints c;
  c.sector = AngularSector{0.25, 1};
  c.localize = 1.5;
  const DyadicBand band{8};
  const auto f = make_localized_data(g, band, c, 42);
  std::size_t count = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (f[i] == Complex{}) continue;
    ++count;
    CHECK(band.contains(g.freq(i).norm()));
    CHECK(c.sector->contains(g.freq(i)));
    CHECK_FALSE(g.is_nyquist(i));
  }
  CHECK(count > 10);
  CHECK(l2_norm_squared(f) == doctest::Approx(1.0).epsilon(1e-12));
  const auto f2 = make_localized_data(g, band, c, 42);
  CHECK(f.data() == f2.data());
  CHECK(make_localized_data(g, band, c, 43).data() != f.data());

  DataConstraints slab;
  slab.xi_min = 3.0;
  slab.xi_max = 4.0;
  slab.eta_min = 5;
  slab.eta_max = 8;
  const auto s = make_localized_data(g, band, slab, 1);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (s[i] == Complex{}) continue;
    const Freq z = g.freq(i);
    CHECK(z.xi >= 3.0);
    CHECK(z.xi < 4.0);
    CHECK(z.eta >= 5);
    CHECK(z.eta <= 8);
  }
}

TEST_CASE("localized data errors name the violated constraint") {
  const Grid g(8 * kPi, 64, 16);
  DataConstraints c;
  CHECK_THROWS_AS(make_localized_data(g, DyadicBand{64}, c, 1), std::invalid_argument);  // band off the grid
  c.sector = AngularSector{0.01, 0};
  CHECK_THROWS_AS(make_localized_data(g, DyadicBand{4}, c, 1), std::invalid_argument);  // below resolution
}

TEST_CASE("localization concentrates the packet around x = 0") {
  const Grid g(16 * kPi, 512, 16);
  DataConstraints c;
  c.xi_min = 2.0;
  c.xi_max = 6.0;
  c.eta_min = 0;
  c.eta_max = 0;
  c.localize = 2.0;
  const auto f = make_localized_data(g, DyadicBand{2}, c, 5);
  const auto u = inverse_transform(f);
  double inner = 0, total = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double m = std::norm(u.values[i]);
    total += m;
    if (std::abs(g.x(g.ix_of(i))) < 8.0) inner += m;
  }
  CHECK(inner / total > 0.99);
}

TEST_CASE("a zero factor gives a zero norm") {
  const Grid g(4 * kPi, 32, 16);
  const auto a = random_support(g, {{4, 3}, {5, 3}}, 1);
  const SpectralField zero(g);
  const auto e = windowed(BilinearVariant::Separation, 1.0);
  CHECK(bilinear_norm(e, a, zero).norm == 0.0);
  CHECK(bilinear_norm_oracle(e, zero, a).norm == 0.0);
}

TEST_CASE("single-mode product has the closed-form norm") {
  // ||F||^2 = A w^4 |c1 c2|^2 2T = (2pi)^3 2T / L for unit data
  const double lx = 4 * kPi;
  const Grid g(lx, 32, 16);
  SpectralField a(g), b(g);
  const double c = 1.0 / std::sqrt(g.weight());
  a.at({-6, 2}) = c;
  b.at({10, -3}) = Complex{0, c};
  for (double t : {0.5, 2.0, 7.0}) {
    for (auto v : {BilinearVariant::Separation, BilinearVariant::ConjugateSeparation}) {
      const auto e = windowed(v, t);
      const double expect = std::sqrt(std::pow(2 * kPi, 3) * 2 * t / lx);
      CHECK(bilinear_norm(e, a, b).norm == doctest::Approx(expect).epsilon(1e-10));
      CHECK(bilinear_norm_oracle(e, a, b).norm == doctest::Approx(expect).epsilon(1e-12));
    }
  }
  // the separation indicator removes the pair entirely
  auto e = windowed(BilinearVariant::Separation, 1.0);
  e.m = 20;
  CHECK(bilinear_norm(e, a, b).norm == 0.0);
}

TEST_CASE("quadrature and pair sum agree with the naive quadruple sum") {
  const Grid g(6 * kPi, 64, 32);
  const std::vector<LatticePoint> s1{{-9, 1}, {-8, 2}, {-8, 3}, {-7, 1}, {-10, 2}, {3, 4}};
  const std::vector<LatticePoint> s2{{6, -2}, {7, 3}, {9, 1}, {8, 2}, {-5, 5}, {7, 4}};
  const auto a = random_support(g, s1, 11);
  const auto b = random_support(g, s2, 12);
  for (auto v : {BilinearVariant::Separation, BilinearVariant::Angular, BilinearVariant::ConjugateSector,
                 BilinearVariant::ConjugateSeparation}) {
    for (double t : {0.3, 1.7}) {
      CAPTURE(variant_name(v));
      auto e = windowed(v, t);
      e.ell = 1;
      const double ref = std::sqrt(naive_norm2(e, a, b, t));
      REQUIRE(ref > 0.0);
      CHECK(bilinear_norm(e, a, b).norm == doctest::Approx(ref).epsilon(1e-9));
      CHECK(bilinear_norm_oracle(e, a, b).norm == doctest::Approx(ref).epsilon(1e-11));
    }
  }
}

TEST_CASE("quadrature matches a direct space-time sum") {
  // F evaluated pointwise from its mode expansion, trapezoid in x, y (exact for
  // trigonometric polynomials) and composite Simpson in t
  const Grid g(2 * kPi, 16, 8);
  const auto a = random_support(g, {{-3, 1}, {-2, -1}}, 3);
  const auto b = random_support(g, {{2, 2}, {3, 0}}, 4);
  const auto e = windowed(BilinearVariant::Separation, 0.8);
  const auto pairs = admissible_pairs(e, a, b);
  const double w = g.weight();
  const int nx = 16, ny = 16, nt = 2000;
  double total = 0;
  for (int k = 0; k <= nt; ++k) {
    const double t = -e.t_window + 2 * e.t_window * k / nt;
    double s = 0;
    for (int jx = 0; jx < nx; ++jx) {
      for (int jy = 0; jy < ny; ++jy) {
        const double x = -g.lx() / 2 + g.lx() * jx / nx;
        const double y = 2 * kPi * jy / ny;
        Complex f = 0;
        for (const auto& p : pairs) {
          const Freq z = g.freq(p.sum);
          f += p.c * std::polar(1.0, -p.w * t + x * z.xi + y * z.eta);
        }
        s += std::norm(f * w * w) * (g.lx() / nx) * (2 * kPi / ny);
      }
    }
    const double wt = (k == 0 || k == nt) ? 1 : (k % 2 ? 4 : 2);
    total += wt * s;
  }
  total *= 2 * e.t_window / nt / 3;
  // pairs above carry no (2pi)^2 factor: F = (2pi)^2 u1 u2 and u = (1/2pi) sum
  CHECK(bilinear_norm(e, a, b).norm == doctest::Approx(std::sqrt(total)).epsilon(1e-8));
}

TEST_CASE("separation norm is symmetric and homogeneous") {
  const Grid g(8 * kPi, 128, 32);
  BilinearExperiment e;
  e.n1 = e.n2 = 4;
  e.m = 2;
  e.t_window = 2.0;
  DataConstraints c1, c2;
  c1.xi_max = -1.0;
  c2.xi_min = 1.0;
  c1.localize = c2.localize = 1.5;
  const auto a = make_localized_data(g, DyadicBand{4}, c1, 1);
  const auto b = make_localized_data(g, DyadicBand{4}, c2, 2);
  const double ab = bilinear_norm(e, a, b).norm;
  CHECK(bilinear_norm(e, b, a).norm == doctest::Approx(ab).epsilon(1e-10));
  SpectralField a3 = a;
  a3 *= Complex{0, -3};
  CHECK(bilinear_norm(e, a3, b).norm == doctest::Approx(3 * ab).epsilon(1e-10));
}

TEST_CASE("windowed norm is nondecreasing in T") {
  const Grid g(8 * kPi, 128, 32);
  DataConstraints c;
  c.localize = 1.5;
  c.sector = AngularSector{0.5, 0};
  const auto a = make_localized_data(g, DyadicBand{4}, c, 8);
  c.sector = AngularSector{0.5, 3};
  const auto b = make_localized_data(g, DyadicBand{8}, c, 9);
  auto e = windowed(BilinearVariant::Angular, 0.1);
  e.n2 = 8;
  e.theta = 0.5;
  double prev = 0;
  for (double t : {0.1, 0.2, 0.4, 0.8, 1.6, 3.2}) {
    e.t_window = t;
    const double n = bilinear_norm_oracle(e, a, b).norm;
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("pair sum approaches the resonant rate like 1/T") {
  const Grid g(6 * kPi, 64, 32);
  const auto a = random_support(g, {{-9, 1}, {-8, 2}, {-7, 1}, {-8, 0}}, 21);
  const auto b = random_support(g, {{6, -2}, {7, 3}, {9, 1}, {8, 1}}, 22);
  const auto e = windowed(BilinearVariant::Separation, 1.0);
  const double d = resonant_rate(e, a, b);
  const auto series = pair_sum_series(e, a, b, {1e2, 1e3, 1e4});
  std::vector<double> gap;
  for (std::size_t k = 0; k < 3; ++k) gap.push_back(std::abs(series.norm2[k] / (2 * series.t[k]) - d) * series.t[k]);
  const double scale = 10 * (series.diagonal_rate + d);
  for (double v : gap) CHECK(v < scale);
  CHECK(series.diagonal_rate > 0.0);
}

TEST_CASE("adaptive window stops below the wrap-around time") {
  // the packet must separate well before the wrap-around time L / (4M)
  const Grid g(32 * kPi, 128, 32);
  BilinearExperiment e;
  e.n1 = 8;
  e.n2 = 8;
  e.m = 4;
  e.trials = 1;
  const auto [a, b] = sweep_data(g, e, 0);
  const auto q = bilinear_norm(e, a, b);
  const auto p = bilinear_norm_oracle(e, a, b);
  CHECK(q.t <= g.lx() / (4 * e.m) + 1e-12);
  CHECK(q.reliable);
  CHECK(q.tail <= 0.01);
  CHECK(p.t == doctest::Approx(q.t));
  CHECK(p.norm == doctest::Approx(q.norm).epsilon(1e-8));
}

TEST_CASE("L4 norm of a single mode has the closed form") {
  const double lx = 4 * kPi;
  const Grid g(lx, 32, 16);
  SpectralField f(g);
  f.at({3, 2}) = 1.0 / std::sqrt(g.weight());
  const double t = 1.5;
  // |u| = w |c| / (2pi) everywhere
  const double w = g.weight();
  const double expect = std::pow(2 * t * g.area() * w * w, 0.25) / (2 * kPi);
  CHECK(l4_norm(f, t) == doctest::Approx(expect).epsilon(1e-10));
}

TEST_CASE("line fits need four points") {
  CHECK_FALSE(fit_line({0, 1, 2}, {1, 3, 5}).valid);
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.valid);
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.residual == doctest::Approx(0.0));
}

TEST_CASE("complexity caps throw") {
  const Grid g(6 * kPi, 64, 32);
  const auto a = random_support(g, {{-9, 1}, {-8, 2}, {-7, 1}}, 1);
  const auto b = random_support(g, {{6, -2}, {7, 3}}, 2);
  auto e = windowed(BilinearVariant::Angular, 1.0);
  BilinearOptions opt;
  opt.max_modes = 2;
  CHECK_THROWS_AS(bilinear_norm_oracle(e, a, b, opt), ComplexityError);
  opt = {};
  opt.max_nodes = 10;
  CHECK_THROWS_AS(bilinear_norm(e, a, b, opt), ComplexityError);
}

TEST_CASE("sweeps are reproducible and independent of the thread count") {
  SweepSpec s;
  s.base.n1 = 8;
  s.base.n2 = 16;
  s.base.trials = 2;
  s.axis = SweepAxis::M;
  s.values = {2, 4, 8, 16};
  s.method = NormMethod::PairSum;
  const Grid g = sweep_grid(s, 8 * kPi);
  const auto r1 = scaling_sweep(g, s, 1);
  const auto r2 = scaling_sweep(g, s, 3);
  REQUIRE(r1.rows.size() == 8);
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(r1.rows[i].norm == r2.rows[i].norm);
    CHECK(r1.rows[i].ratio > 0.0);
  }
  CHECK(r1.ratio_fit.valid);
  CHECK(r1.summary.size() == 4);
  s.values = {2, 4, 8};
  CHECK_FALSE(scaling_sweep(g, s, 1).ratio_fit.valid);
}
