// spectral_domain.hpp
// Discretization of the cylinder R x T (T = R / 2piZ).
//
// The line is truncated to a periodic box [-L/2, L/2) of length L, so x
// frequencies live on the lattice (2pi/L) * {-nx/2, ..., nx/2-1} and y
// frequencies on the integers {-ny/2, ..., ny/2-1}. Coefficients follow the
// continuum normalization
//
//     fhat(zeta) = 1/(2pi) * int exp(-i z.zeta) f(z) dz,
//     f(z)       = 1/(2pi) * int exp(+i z.zeta) fhat(zeta) (dzeta),
//
// where the frequency measure (dzeta) is the Riemann sum with weight 2pi/L per
// xi node and 1 per eta node. With that weight Parseval reads
// ||f||^2 = int |fhat|^2 (dzeta) exactly on the lattice.
//
// Storage is centered: index ix corresponds to kx = ix - nx/2 and likewise for
// y, row-major with eta outer and xi inner. The first row/column (kx = -nx/2 or
// ky = -ny/2) is the Nyquist line and is excluded from all symbol evaluations.
#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace cylnls {

using Complex = std::complex<double>;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// A point zeta = (xi, eta) of the frequency lattice (or of R x Z in general).
struct Freq {
  double xi = 0.0;
  double eta = 0.0;

  Freq operator+(const Freq& o) const { return {xi + o.xi, eta + o.eta}; }
  Freq operator-(const Freq& o) const { return {xi - o.xi, eta - o.eta}; }
  Freq operator-() const { return {-xi, -eta}; }
  Freq operator*(double s) const { return {s * xi, s * eta}; }
  bool operator==(const Freq&) const = default;

  double norm2() const { return xi * xi + eta * eta; }
  double norm() const { return std::hypot(xi, eta); }
  double dot(const Freq& o) const { return xi * o.xi + eta * o.eta; }
  /// arg(zeta) on the branch [0, 2pi); undefined (returns 0) at zeta = 0.
  double arg() const;
};

/// Integer lattice coordinates (kx, ky) of a mode; xi = kx * 2pi/L, eta = ky.
struct LatticePoint {
  int kx = 0;
  int ky = 0;
  LatticePoint operator+(const LatticePoint& o) const { return {kx + o.kx, ky + o.ky}; }
  LatticePoint operator-(const LatticePoint& o) const { return {kx - o.kx, ky - o.ky}; }
  LatticePoint operator-() const { return {-kx, -ky}; }
  bool operator==(const LatticePoint&) const = default;
};

class Grid {
 public:
  /// Throws std::invalid_argument unless lx > 0 and nx, ny are even and >= 4.
  Grid(double lx, int nx, int ny);

  double lx() const { return lx_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }

  double dx() const { return lx_ / nx_; }
  double dy() const { return kTwoPi / ny_; }
  /// Lattice spacing in xi, which is also the (dzeta) quadrature weight.
  double dxi() const { return kTwoPi / lx_; }
  double weight() const { return dxi(); }
  /// Area of the physical box, L * 2pi.
  double area() const { return lx_ * kTwoPi; }

  int kx(int ix) const { return ix - nx_ / 2; }
  int ky(int iy) const { return iy - ny_ / 2; }
  double x(int ix) const { return -0.5 * lx_ + ix * dx(); }
  double y(int iy) const { return iy * dy(); }

  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * nx_ + ix;
  }
  int ix_of(std::size_t idx) const { return static_cast<int>(idx % nx_); }
  int iy_of(std::size_t idx) const { return static_cast<int>(idx / nx_); }

  LatticePoint lattice(std::size_t idx) const { return {kx(ix_of(idx)), ky(iy_of(idx))}; }
  Freq freq(const LatticePoint& p) const { return {p.kx * dxi(), static_cast<double>(p.ky)}; }
  Freq freq(std::size_t idx) const { return freq(lattice(idx)); }

  /// Storage index of lattice point (kx, ky), if it lies inside the stored range.
  std::optional<std::size_t> index_of(const LatticePoint& p) const;
  bool contains(const LatticePoint& p) const;
  bool is_nyquist(std::size_t idx) const { return ix_of(idx) == 0 || iy_of(idx) == 0; }

  bool operator==(const Grid& o) const {
    return lx_ == o.lx_ && nx_ == o.nx_ && ny_ == o.ny_;
  }

 private:
  double lx_;
  int nx_;
  int ny_;
};

/// Field values on the physical grid (x_j, y_l), row-major, y outer.
struct PhysicalField {
  Grid grid;
  std::vector<Complex> values;

  explicit PhysicalField(const Grid& g) : grid(g), values(g.size()) {}
  PhysicalField(const Grid& g, std::vector<Complex> v);
};

/// Frequency coefficients fhat(zeta) in the normalization described above.
class SpectralField {
 public:
  explicit SpectralField(const Grid& g) : grid_(g), coeffs_(g.size()) {}
  /// Throws std::invalid_argument when the array does not match the grid.
  SpectralField(const Grid& g, std::vector<Complex> coeffs);

  const Grid& grid() const { return grid_; }
  std::span<Complex> coeffs() { return coeffs_; }
  std::span<const Complex> coeffs() const { return coeffs_; }
  std::vector<Complex>& data() { return coeffs_; }
  const std::vector<Complex>& data() const { return coeffs_; }

  Complex& operator[](std::size_t i) { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const { return coeffs_[i]; }
  Complex& at(const LatticePoint& p);
  Complex at(const LatticePoint& p) const;

  SpectralField& operator*=(Complex s);
  SpectralField& operator+=(const SpectralField& o);

 private:
  Grid grid_;
  std::vector<Complex> coeffs_;
};

SpectralField operator*(Complex s, SpectralField f);

/// Uniformly time-sampled sequence of fields sharing one grid.
class SpaceTimeTrace {
 public:
  SpaceTimeTrace(const Grid& g, double t0, double dt);

  void push_back(SpectralField frame);

  const Grid& grid() const { return grid_; }
  double t0() const { return t0_; }
  double dt() const { return dt_; }
  std::size_t size() const { return frames_.size(); }
  double time(std::size_t k) const { return t0_ + dt_ * static_cast<double>(k); }
  const SpectralField& frame(std::size_t k) const { return frames_.at(k); }
  const std::vector<SpectralField>& frames() const { return frames_; }

 private:
  Grid grid_;
  double t0_;
  double dt_;
  std::vector<SpectralField> frames_;
};

SpectralField forward_transform(const PhysicalField& f);
PhysicalField inverse_transform(const SpectralField& f);

/// Convenience overload; throws std::invalid_argument on shape mismatch.
SpectralField forward_transform(const Grid& g, std::span<const Complex> values);

struct MeasureResult {
  double value = 0.0;
  bool nan_detected = false;
};

/// Sum_eta (2pi/L) Sum_xi g(xi, eta) over the stored lattice. A NaN anywhere in
/// g propagates to the result and sets nan_detected.
MeasureResult measure_integrate(const Grid& g, std::span<const double> values);

/// L^2 norm squared through the (dzeta) quadrature.
double l2_norm_squared(const SpectralField& f);

/// L^2 norm squared by the physical-space Riemann sum.
double l2_norm_squared(const PhysicalField& f);

/// Fraction of the mass carried by the outer 10% (5% per side) of the x box.
double boundary_mass_fraction(const PhysicalField& f);

}  // namespace cylnls
