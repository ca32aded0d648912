#include <doctest.h>

#include <cmath>

#include "cylnls/diagnostics.hpp"
#include "cylnls/dynamics.hpp"
#include "cylnls/errors.hpp"
#include "oracles.hpp"

using namespace cylnls;

namespace {

SpectralField gaussian_packet(const Grid& g, double amp, double width, double kick) {
  PhysicalField u(g);
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      const double x = g.x(ix);
      const double y = g.y(iy);
      u.values[g.index(ix, iy)] = amp * std::exp(-x * x / (2 * width * width)) *
                                  std::polar(1.0, kick * x) * (1.0 + 0.5 * std::cos(y)) *
                                  std::polar(1.0, 0.3 * std::sin(y));
    }
  }
  return forward_transform(u);
}

double rel_l2(const SpectralField& a, const SpectralField& b) {
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("solver config validation") {
  SolverConfig c;
  CHECK_NOTHROW(c.validate());
  c.dt = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.step_heuristic_c = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.t_end = -1;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("linear propagator") {
  const Grid g(10.0, 32, 8);
  SpectralField f(g, oracle::random_complex(g.size(), 1));
  CHECK(linear_propagate(f, 0.0).data() == f.data());

  SpectralField mode(g);
  const LatticePoint p{3, 2};
  mode.at(p) = {0.7, -0.2};
  const double t = 1.37;
  const auto out = linear_propagate(mode, t);
  const double z2 = g.freq(p).norm2();
  CHECK(std::abs(out.at(p) - mode.at(p) * std::polar(1.0, -z2 * t)) < 1e-15);
  CHECK(mass(out) == doctest::Approx(mass(mode)).epsilon(1e-15));

  const auto back = linear_propagate(linear_propagate(f, 2.3), -2.3);
  CHECK(rel_l2(back, f) < 1e-12);
}

TEST_CASE("free Gaussian matches the closed form") {
  const Grid g(80.0, 512, 4);
  const double a = 1.5;
  PhysicalField u0(g);
  for (int iy = 0; iy < g.ny(); ++iy)
    for (int ix = 0; ix < g.nx(); ++ix) u0.values[g.index(ix, iy)] = std::exp(-g.x(ix) * g.x(ix) / (2 * a * a));
  const double t = 0.8;
  const auto u = inverse_transform(linear_propagate(forward_transform(u0), t));
  double err = 0;
  for (int ix = 0; ix < g.nx(); ++ix) {
    for (int iy = 0; iy < g.ny(); ++iy) {
      err = std::max(err, std::abs(u.values[g.index(ix, iy)] - oracle::free_gaussian(a, t, g.x(ix))));
    }
  }
  CHECK(err < 1e-8);
}

TEST_CASE("nonlinear phase step") {
  const Grid g(6.0, 16, 8);
  SpectralField f(g, oracle::random_complex(g.size(), 2));
  CHECK(rel_l2(nonlinear_phase_step(f, 0.0), f) < 1e-14);
  CHECK(mass(nonlinear_phase_step(f, 0.37)) == doctest::Approx(mass(f)).epsilon(1e-12));

  // constant field A: global phase exp(-i |A|^2 dt)
  SpectralField c(g);
  const Complex amp{0.6, 0.8};
  c.at({0, 0}) = amp * g.lx();  // u = A
  const double dt = 0.21;
  const auto out = nonlinear_phase_step(c, dt);
  CHECK(std::abs(out.at({0, 0}) - c.at({0, 0}) * std::polar(1.0, -std::norm(amp) * dt)) < 1e-13);
}

TEST_CASE("Strang step keeps a nonlinear plane wave exact") {
  const Grid g(2 * oracle::pi * 4, 32, 16);
  const LatticePoint p{5, 2};
  const Freq z0 = g.freq(p);
  const Complex amp{0.9, 0.4};
  SpectralField u(g);
  u.at(p) = amp * g.lx();
  SolverConfig cfg;
  cfg.dt = 1e-3;
  StrangStepper st(g, cfg);
  for (int k = 0; k < 1000; ++k) st.step(u, cfg.dt);
  const double omega = z0.norm2() + std::norm(amp);
  const Complex expect = amp * g.lx() * std::polar(1.0, -omega * 1.0);
  CHECK(std::abs(u.at(p) - expect) / std::abs(expect) < 1e-8);
  double others = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (g.lattice(i) != p) others = std::max(others, std::abs(u[i]));
  CHECK(others < 1e-8 * std::abs(expect));
}

TEST_CASE("zero data stays zero") {
  const Grid g(6.0, 16, 8);
  SpectralField u(g);
  SolverConfig cfg;
  StrangStepper st(g, cfg);
  for (int k = 0; k < 10; ++k) st.step(u, 0.01);
  for (auto c : u.data()) CHECK(c == Complex{});
}

TEST_CASE("Strang splitting is second order") {
  const Grid g(30.0, 128, 16);
  const auto u0 = gaussian_packet(g, 1.0, 1.5, 1.0);
  SolverConfig cfg;
  cfg.dealias = false;
  auto run = [&](double dt, double t_end) {
    StrangStepper st(g, cfg);
    SpectralField u = u0;
    const int n = static_cast<int>(std::lround(t_end / dt));
    for (int k = 0; k < n; ++k) st.step(u, dt);
    return u;
  };
  const double t_end = 0.5;
  const auto ref = run(0.5 / 2048, t_end);
  std::vector<double> errs;
  for (double dt : {0.05, 0.025, 0.0125}) errs.push_back(rel_l2(run(dt, t_end), ref));
  const double slope1 = std::log2(errs[0] / errs[1]);
  const double slope2 = std::log2(errs[1] / errs[2]);
  CHECK(slope1 == doctest::Approx(2.0).epsilon(0.1));
  CHECK(slope2 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("non-finite states are rejected without touching the field") {
  const Grid g(6.0, 16, 8);
  SpectralField u(g);
  u[g.index(5, 5)] = std::numeric_limits<double>::infinity();
  SolverConfig cfg;
  StrangStepper st(g, cfg);
  const auto before = u.data();
  CHECK_THROWS_AS(st.step(u, 0.01), NumericalError);
  CHECK(std::isinf(u[g.index(5, 5)].real()));
  CHECK(u.data().size() == before.size());
}

TEST_CASE("dealias mask") {
  const Grid g(6.0, 12, 8);
  const auto m = dealias_mask(g, 2.0 / 3.0);
  int kept = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!m[i]) continue;
    ++kept;
    const auto p = g.lattice(i);
    CHECK(std::abs(p.kx) < 4);
    CHECK(std::abs(p.ky) < 8.0 / 3.0);
  }
  CHECK(kept == 7 * 5);
}

TEST_CASE("simulate: linear flow keeps H^s fixed") {
  const Grid g(30.0, 64, 8);
  const auto u0 = gaussian_packet(g, 1.0, 1.5, 0.5);
  SolverConfig cfg;
  cfg.nonlinear = false;
  cfg.dt = 0.01;
  cfg.t_end = 0.5;
  SimulationOptions opts;
  opts.hs_s = 2.0;
  opts.diag_every = 5;
  const auto res = simulate(u0, cfg, opts);
  CHECK_FALSE(res.aborted);
  CHECK(res.steps == 50);
  REQUIRE(res.series.size() == 11);
  for (const auto& r : res.series) CHECK(r.hs_norm == doctest::Approx(res.series[0].hs_norm).epsilon(1e-12));
  CHECK(std::isnan(res.series[0].ei));
}

TEST_CASE("simulate: windows, frames and mass conservation") {
  const Grid g(40.0, 128, 16);
  const auto u0 = gaussian_packet(g, 0.8, 1.5, 0.0);
  SolverConfig cfg;
  cfg.dt = 0.005;
  cfg.t_end = 1.0;
  cfg.kappa = 0.5;
  cfg.dealias = false;  // the projection itself removes a little mass
  SimulationOptions opts;
  opts.spec = {2.0, 4.0};
  opts.frame_every = 20;
  const auto res = simulate(u0, cfg, opts);
  CHECK_FALSE(res.aborted);
  CHECK(res.trace.size() == 11);
  CHECK(res.trace.dt() == doctest::Approx(0.1));
  CHECK(res.max_mass_drift < 1e-12);
  const double d0 = 0.5 * std::pow(hs_norm(apply_I(opts.spec, u0), 1.0), -2.0);
  CHECK(res.delta0 == doctest::Approx(d0));
  CHECK(res.window_starts.front() == 0.0);
  CHECK(res.window_starts.size() >= 2);
  CHECK_FALSE(res.boundary_flagged);

  SolverConfig bad = cfg;
  bad.t_end = 0.0123;
  CHECK_THROWS_AS(simulate(u0, bad, opts), std::invalid_argument);
}

TEST_CASE("simulate flags an unstable run") {
  const Grid g(10.0, 32, 8);
  SpectralField u0(g);
  u0[g.index(16, 4)] = std::numeric_limits<double>::quiet_NaN();
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.t_end = 0.1;
  SimulationOptions opts;
  opts.diag_every = 1;
  const auto res = simulate(u0, cfg, opts);
  CHECK(res.aborted);
  CHECK_FALSE(res.abort_reason.empty());
}

TEST_CASE("substep names round-trip") {
  for (auto s : {NonlinearSubstep::ExactPhase, NonlinearSubstep::GalerkinRk4})
    CHECK(parse_substep(substep_name(s)) == s);
  CHECK_THROWS_AS(parse_substep("euler"), std::invalid_argument);
}

TEST_CASE("Galerkin RK4 substep keeps the truncated flow second order") {
  const Grid g(30.0, 64, 16);
  auto u0 = gaussian_packet(g, 1.2, 1.0, 2.0);
  SolverConfig cfg;
  cfg.dealias_fraction = 0.5;
  cfg.substep = NonlinearSubstep::GalerkinRk4;
  StrangStepper(g, cfg).project(u0);
  auto run = [&](double dt) {
    StrangStepper st(g, cfg);
    SpectralField u = u0;
    const int n = static_cast<int>(std::lround(0.4 / dt));
    for (int k = 0; k < n; ++k) st.step(u, dt);
    return u;
  };
  const auto ref = run(0.4 / 2048);
  std::vector<double> errs;
  for (double dt : {0.02, 0.01, 0.005}) errs.push_back(rel_l2(run(dt), ref));
  CHECK(std::log2(errs[0] / errs[1]) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::log2(errs[1] / errs[2]) == doctest::Approx(2.0).epsilon(0.1));

  // the truncated flow conserves mass; RK4 only to high order
  const auto u = run(0.005);
  CHECK(std::abs(mass(u) - mass(u0)) / mass(u0) < 1e-8);
}

TEST_CASE("Galerkin RK4 substep on a plane wave") {
  const Grid g(2 * oracle::pi * 4, 32, 16);
  const LatticePoint p{5, 2};
  const Complex amp{0.9, 0.4};
  SpectralField u(g);
  u.at(p) = amp * g.lx();
  SolverConfig cfg;
  cfg.substep = NonlinearSubstep::GalerkinRk4;
  StrangStepper st(g, cfg);
  for (int k = 0; k < 1000; ++k) st.step(u, 1e-3);
  const Complex expect = amp * g.lx() * std::polar(1.0, -(g.freq(p).norm2() + std::norm(amp)));
  CHECK(std::abs(u.at(p) - expect) / std::abs(expect) < 1e-8);
}
