// dynamics.cpp
// Exact linear propagator, exact nonlinear phase, Strang stepper and the
// windowed simulation driver.

#include "cylnls/dynamics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "cylnls/errors.hpp"
#include "fft_workspace.hpp"

namespace cylnls {

const char* substep_name(NonlinearSubstep s) {
  return s == NonlinearSubstep::ExactPhase ? "exact-phase" : "galerkin-rk4";
}

NonlinearSubstep parse_substep(const std::string& name) {
  if (name == "exact-phase") return NonlinearSubstep::ExactPhase;
  if (name == "galerkin-rk4") return NonlinearSubstep::GalerkinRk4;
  throw std::invalid_argument("unknown nonlinear substep '" + name + "' (exact-phase, galerkin-rk4)");
}

void SolverConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("solver: dt must be positive");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("solver: t_end must be >= 0");
  if (!(dealias_fraction > 0.0 && dealias_fraction <= 1.0)) {
    throw std::invalid_argument("solver: dealias_fraction must lie in (0, 1]");
  }
  if (!(step_heuristic_c > 0.0)) throw std::invalid_argument("solver: c must be positive");
  if (!(kappa > 0.0)) throw std::invalid_argument("solver: kappa must be positive");
  if (!(mass_drift_limit > 0.0)) throw std::invalid_argument("solver: mass drift limit must be positive");
  if (!(boundary_threshold > 0.0)) throw std::invalid_argument("solver: boundary threshold must be positive");
}

std::vector<bool> dealias_mask(const Grid& g, double fraction) {
  std::vector<bool> keep(g.size());
  const double cx = fraction * 0.5 * g.nx();
  const double cy = fraction * 0.5 * g.ny();
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto p = g.lattice(i);
    keep[i] = !g.is_nyquist(i) && std::abs(p.kx) < cx && std::abs(p.ky) < cy;
  }
  return keep;
}

SpectralField linear_propagate(const SpectralField& f, double t) {
  SpectralField out = f;
  const Grid& g = f.grid();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] *= std::polar(1.0, -g.freq(i).norm2() * t);
  return out;
}

SpectralField nonlinear_phase_step(const SpectralField& f, double dt) {
  PhysicalField u = inverse_transform(f);
  for (auto& v : u.values) v *= std::polar(1.0, -std::norm(v) * dt);
  return forward_transform(u);
}

struct StrangStepper::Impl {
  SolverConfig cfg;
  detail::FftWorkspace ws;
  std::vector<double> z2;
  std::vector<bool> mask;
  std::vector<Complex> half_phase;
  double cached_h = std::numeric_limits<double>::quiet_NaN();
  std::vector<Complex> spec;
  std::vector<Complex> phys;
  std::vector<Complex> k1, k2, stage, acc;

  Impl(const Grid& g, const SolverConfig& c)
      : cfg(c), ws(g), z2(g.size()), mask(dealias_mask(g, c.dealias_fraction)), half_phase(g.size()),
        spec(g.size()), phys(g.size()) {
    for (std::size_t i = 0; i < g.size(); ++i) z2[i] = g.freq(i).norm2();
    if (c.substep == NonlinearSubstep::GalerkinRk4) {
      k1.resize(g.size());
      k2.resize(g.size());
      stage.resize(g.size());
      acc.resize(g.size());
    }
  }

  // out = -i P(|u|^2 u), u the physical field of v
  void rhs(const std::vector<Complex>& v, std::vector<Complex>& out) {
    ws.inverse(v, phys);
    for (auto& p : phys) p *= Complex{0.0, -std::norm(p)};
    ws.forward(phys, out);
    if (cfg.dealias) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (!mask[i]) out[i] = 0.0;
      }
    }
  }

  void rk4(std::vector<Complex>& v, double h) {
    const std::size_t n = v.size();
    rhs(v, k1);
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] = v[i] + h / 6.0 * k1[i];
      stage[i] = v[i] + 0.5 * h * k1[i];
    }
    rhs(stage, k2);
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] += h / 3.0 * k2[i];
      stage[i] = v[i] + 0.5 * h * k2[i];
    }
    rhs(stage, k1);
    for (std::size_t i = 0; i < n; ++i) {
      acc[i] += h / 3.0 * k1[i];
      stage[i] = v[i] + h * k1[i];
    }
    rhs(stage, k2);
    for (std::size_t i = 0; i < n; ++i) v[i] = acc[i] + h / 6.0 * k2[i];
  }

  void set_step(double h) {
    if (h == cached_h) return;
    for (std::size_t i = 0; i < z2.size(); ++i) half_phase[i] = std::polar(1.0, -0.5 * z2[i] * h);
    cached_h = h;
  }
};

StrangStepper::StrangStepper(const Grid& g, const SolverConfig& cfg) {
  cfg.validate();
  impl_ = std::make_unique<Impl>(g, cfg);
}

StrangStepper::~StrangStepper() = default;

void StrangStepper::project(SpectralField& u) const {
  if (!impl_->cfg.dealias) return;
  for (std::size_t i = 0; i < u.data().size(); ++i) {
    if (!impl_->mask[i]) u[i] = 0.0;
  }
}

void StrangStepper::step(SpectralField& u, double h) {
  Impl& s = *impl_;
  if (!(u.grid() == s.ws.grid())) throw std::invalid_argument("strang step: grid mismatch");
  s.set_step(h);
  auto& v = s.spec;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = u[i] * s.half_phase[i];
  if (s.cfg.nonlinear && s.cfg.substep == NonlinearSubstep::GalerkinRk4) {
    if (s.cfg.dealias) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!s.mask[i]) v[i] = 0.0;
      }
    }
    s.rk4(v, h);
  } else if (s.cfg.nonlinear) {
    s.ws.inverse(v, s.phys);
    for (auto& p : s.phys) p *= std::polar(1.0, -std::norm(p) * h);
    s.ws.forward(s.phys, v);
    if (s.cfg.dealias) {
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (!s.mask[i]) v[i] = 0.0;
      }
    }
  }
  bool finite = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] *= s.half_phase[i];
    finite = finite && std::isfinite(v[i].real()) && std::isfinite(v[i].imag());
  }
  if (!finite) throw NumericalError("strang step produced a non-finite state");
  std::copy(v.begin(), v.end(), u.data().begin());
}

SpectralField strang_step(const SpectralField& f, double dt, const SolverConfig& cfg) {
  StrangStepper st(f.grid(), cfg);
  SpectralField out = f;
  st.step(out, dt);
  return out;
}

double local_window_length(const SpectralField& u0, const MultiplierSpec& spec, const SolverConfig& cfg) {
  const double n = hs_norm(apply_I(spec, u0), 1.0);
  if (n == 0.0) return std::numeric_limits<double>::infinity();
  return cfg.kappa * std::pow(n, -cfg.step_heuristic_c);
}

namespace {

DiagnosticRecord record(const SpectralField& u, double t, const SimulationOptions& opts) {
  DiagnosticRecord r;
  r.t = t;
  r.mass = mass(u);
  r.energy = energy(u);
  r.hs_norm = hs_norm(u, opts.hs_s);
  r.ei = opts.modified_energy ? modified_energy(u, *opts.modified_energy)
                              : std::numeric_limits<double>::quiet_NaN();
  r.boundary_mass = boundary_mass_fraction(inverse_transform(u));
  return r;
}

std::size_t step_count(const SolverConfig& cfg) {
  const double raw = cfg.t_end / cfg.dt;
  const auto n = static_cast<std::size_t>(std::llround(raw));
  if (std::abs(static_cast<double>(n) - raw) > 1e-9 * std::max(1.0, raw)) {
    throw std::invalid_argument("solver: t_end must be a whole number of steps dt");
  }
  return n;
}

}  // namespace

SimulationResult simulate(const SpectralField& u0, const SolverConfig& cfg, const SimulationOptions& opts) {
  cfg.validate();
  opts.spec.validate();
  const std::size_t n_steps = step_count(cfg);
  const Grid& g = u0.grid();
  const std::size_t frame_every = opts.frame_every;
  SimulationResult res{SpaceTimeTrace(g, 0.0, cfg.dt * static_cast<double>(std::max<std::size_t>(frame_every, 1))),
                       {}, 0.0, {}, u0, 0.0, 0, false, {}, false, 0.0, 0.0};

  StrangStepper stepper(g, cfg);
  SpectralField u = u0;
  if (cfg.nonlinear) stepper.project(u);

  res.delta0 = local_window_length(u, opts.spec, cfg);
  std::size_t steps_per_window = n_steps + 1;
  if (std::isfinite(res.delta0)) {
    steps_per_window = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(res.delta0 / cfg.dt)));
  }
  for (std::size_t k = 0;; k += steps_per_window) {
    res.window_starts.push_back(static_cast<double>(k) * cfg.dt);
    if (k + steps_per_window >= n_steps) break;
  }

  const double m0 = mass(u);
  auto observe = [&](std::size_t k) {
    const auto rec = record(u, static_cast<double>(k) * cfg.dt, opts);
    res.max_boundary_mass = std::max(res.max_boundary_mass, rec.boundary_mass);
    if (rec.boundary_mass > cfg.boundary_threshold) res.boundary_flagged = true;
    res.series.push_back(rec);
  };

  const std::size_t diag_every = std::max<std::size_t>(opts.diag_every, 1);
  observe(0);
  if (frame_every > 0) res.trace.push_back(u);

  for (std::size_t k = 1; k <= n_steps; ++k) {
    try {
      stepper.step(u, cfg.dt);
    } catch (const NumericalError& e) {
      res.aborted = true;
      res.abort_reason = std::string(e.what()) + " at step " + std::to_string(k);
      break;
    }
    res.steps = k;
    const double drift = m0 > 0.0 ? std::abs(mass(u) - m0) / m0 : 0.0;
    res.max_mass_drift = std::max(res.max_mass_drift, drift);
    if (drift > cfg.mass_drift_limit) {
      res.aborted = true;
      res.abort_reason = "relative mass drift " + std::to_string(drift) + " exceeds the limit at step " +
                         std::to_string(k);
      observe(k);
      break;
    }
    if (k % diag_every == 0 || k == n_steps) observe(k);
    if (frame_every > 0 && k % frame_every == 0) res.trace.push_back(u);
  }
  res.final_state = u;
  res.final_time = static_cast<double>(res.steps) * cfg.dt;
  return res;
}

}  // namespace cylnls
