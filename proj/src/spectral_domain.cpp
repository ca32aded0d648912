// spectral_domain.cpp
// Grid/field containers and the FFTW-backed transform pair.

#include "cylnls/spectral_domain.hpp"

#include <algorithm>
#include <mutex>
#include <stdexcept>
#include <string>

#include "fft_workspace.hpp"

namespace cylnls {

double Freq::arg() const {
  if (xi == 0.0 && eta == 0.0) return 0.0;
  double a = std::atan2(eta, xi);
  if (a < 0.0) a += kTwoPi;
  // atan2 can round a tiny negative angle up to exactly 2pi.
  if (a >= kTwoPi) a -= kTwoPi;
  return a;
}

Grid::Grid(double lx, int nx, int ny) : lx_(lx), nx_(nx), ny_(ny) {
  if (!(lx > 0.0) || !std::isfinite(lx)) {
    throw std::invalid_argument("Grid: box length L_x must be positive and finite");
  }
  if (nx < 4 || ny < 4 || nx % 2 != 0 || ny % 2 != 0) {
    throw std::invalid_argument("Grid: n_x and n_y must be even and >= 4 (got " +
                                std::to_string(nx) + "x" + std::to_string(ny) + ")");
  }
}

bool Grid::contains(const LatticePoint& p) const {
  return p.kx >= -nx_ / 2 && p.kx < nx_ / 2 && p.ky >= -ny_ / 2 && p.ky < ny_ / 2;
}

std::optional<std::size_t> Grid::index_of(const LatticePoint& p) const {
  if (!contains(p)) return std::nullopt;
  return index(p.kx + nx_ / 2, p.ky + ny_ / 2);
}

PhysicalField::PhysicalField(const Grid& g, std::vector<Complex> v) : grid(g), values(std::move(v)) {
  if (values.size() != g.size()) {
    throw std::invalid_argument("PhysicalField: value count " + std::to_string(values.size()) +
                                " does not match grid size " + std::to_string(g.size()));
  }
}

SpectralField::SpectralField(const Grid& g, std::vector<Complex> coeffs)
    : grid_(g), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != g.size()) {
    throw std::invalid_argument("SpectralField: coefficient count " + std::to_string(coeffs_.size()) +
                                " does not match grid size " + std::to_string(g.size()));
  }
}

Complex& SpectralField::at(const LatticePoint& p) {
  auto idx = grid_.index_of(p);
  if (!idx) throw std::out_of_range("SpectralField::at: lattice point outside grid");
  return coeffs_[*idx];
}

Complex SpectralField::at(const LatticePoint& p) const {
  auto idx = grid_.index_of(p);
  return idx ? coeffs_[*idx] : Complex{};
}

SpectralField& SpectralField::operator*=(Complex s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (!(o.grid_ == grid_)) throw std::invalid_argument("SpectralField: grid mismatch in +=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpectralField operator*(Complex s, SpectralField f) {
  f *= s;
  return f;
}

SpaceTimeTrace::SpaceTimeTrace(const Grid& g, double t0, double dt) : grid_(g), t0_(t0), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("SpaceTimeTrace: sample spacing must be positive");
}

void SpaceTimeTrace::push_back(SpectralField frame) {
  if (!(frame.grid() == grid_)) throw std::invalid_argument("SpaceTimeTrace: frame grid differs");
  frames_.push_back(std::move(frame));
}

namespace detail {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

FftBuffer::FftBuffer(std::size_t n) : data_(fftw_alloc_complex(n)), n_(n) {
  if (!data_) throw std::bad_alloc();
  std::fill_n(data(), n_, std::complex<double>{});
}

FftBuffer::~FftBuffer() { fftw_free(data_); }

FftWorkspace::FftWorkspace(const Grid& g)
    : grid_(g), in_(g.size()), out_(g.size()), fft_index_(g.size()), sign_(g.size()) {
  {
    std::lock_guard lock(planner_mutex());
    forward_plan_ = fftw_plan_dft_2d(g.ny(), g.nx(), in_.raw(), out_.raw(), FFTW_FORWARD, FFTW_ESTIMATE);
    backward_plan_ = fftw_plan_dft_2d(g.ny(), g.nx(), in_.raw(), out_.raw(), FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  const int nx = g.nx();
  const int ny = g.ny();
  for (int iy = 0; iy < ny; ++iy) {
    const int my = (g.ky(iy) + ny) % ny;
    for (int ix = 0; ix < nx; ++ix) {
      const int kx = g.kx(ix);
      const int mx = (kx + nx) % nx;
      const std::size_t idx = g.index(ix, iy);
      fft_index_[idx] = static_cast<std::size_t>(my) * nx + mx;
      sign_[idx] = (kx % 2 == 0) ? 1.0 : -1.0;
    }
  }
}

FftWorkspace::~FftWorkspace() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(forward_plan_);
  fftw_destroy_plan(backward_plan_);
}

void FftWorkspace::forward(std::span<const Complex> physical, std::span<Complex> spectral) {
  std::copy(physical.begin(), physical.end(), in_.data());
  fftw_execute(forward_plan_);
  // fhat = (dx dy / 2pi) (-1)^kx DFT = (L / (nx ny)) (-1)^kx DFT
  const double scale = grid_.lx() / static_cast<double>(grid_.size());
  const auto* out = out_.data();
  for (std::size_t i = 0; i < spectral.size(); ++i) {
    spectral[i] = out[fft_index_[i]] * (scale * sign_[i]);
  }
}

void FftWorkspace::inverse(std::span<const Complex> spectral, std::span<Complex> physical) {
  // f = (1/L) IDFT[(-1)^kx fhat], IDFT unnormalized
  const double scale = 1.0 / grid_.lx();
  auto* in = in_.data();
  for (std::size_t i = 0; i < spectral.size(); ++i) {
    in[fft_index_[i]] = spectral[i] * (scale * sign_[i]);
  }
  fftw_execute(backward_plan_);
  std::copy_n(out_.data(), physical.size(), physical.begin());
}

}  // namespace detail

SpectralField forward_transform(const PhysicalField& f) {
  if (f.values.size() != f.grid.size()) {
    throw std::invalid_argument("forward_transform: physical array does not match grid");
  }
  detail::FftWorkspace ws(f.grid);
  SpectralField out(f.grid);
  ws.forward(f.values, out.coeffs());
  return out;
}

SpectralField forward_transform(const Grid& g, std::span<const Complex> values) {
  if (values.size() != g.size()) {
    throw std::invalid_argument("forward_transform: expected " + std::to_string(g.size()) +
                                " values, got " + std::to_string(values.size()));
  }
  return forward_transform(PhysicalField(g, std::vector<Complex>(values.begin(), values.end())));
}

PhysicalField inverse_transform(const SpectralField& f) {
  detail::FftWorkspace ws(f.grid());
  PhysicalField out(f.grid());
  ws.inverse(f.coeffs(), out.values);
  return out;
}

MeasureResult measure_integrate(const Grid& g, std::span<const double> values) {
  if (values.size() != g.size()) {
    throw std::invalid_argument("measure_integrate: value count does not match grid");
  }
  MeasureResult r;
  double sum = 0.0;
  for (double v : values) {
    if (std::isnan(v)) r.nan_detected = true;
    sum += v;
  }
  r.value = g.weight() * sum;
  return r;
}

double l2_norm_squared(const SpectralField& f) {
  double sum = 0.0;
  for (const auto& c : f.coeffs()) sum += std::norm(c);
  return f.grid().weight() * sum;
}

double l2_norm_squared(const PhysicalField& f) {
  double sum = 0.0;
  for (const auto& v : f.values) sum += std::norm(v);
  return sum * f.grid.dx() * f.grid.dy();
}

double boundary_mass_fraction(const PhysicalField& f) {
  const Grid& g = f.grid;
  const int edge = std::max(1, static_cast<int>(std::lround(0.05 * g.nx())));
  double outer = 0.0;
  double total = 0.0;
  for (int iy = 0; iy < g.ny(); ++iy) {
    for (int ix = 0; ix < g.nx(); ++ix) {
      const double m = std::norm(f.values[g.index(ix, iy)]);
      total += m;
      if (ix < edge || ix >= g.nx() - edge) outer += m;
    }
  }
  return total > 0.0 ? outer / total : 0.0;
}

}  // namespace cylnls
