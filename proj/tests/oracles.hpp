// oracles.hpp
// Reference evaluations that share no code with the library: direct DFT sums,
// closed forms, brute-force enumerations. Kept deliberately naive.
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "cylnls/spectral_domain.hpp"

namespace oracle {

using cd = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

/// fhat(xi_k, eta_l) = 1/(2pi) sum_{j,m} exp(-i(x_j xi_k + y_m eta_l)) f(x_j, y_m) dx dy
/// evaluated literally, O(n^2). Indices follow the library's centered storage.
inline std::vector<cd> direct_forward(double lx, int nx, int ny, const std::vector<cd>& f) {
  const double dx = lx / nx;
  const double dy = 2 * pi / ny;
  std::vector<cd> out(static_cast<std::size_t>(nx) * ny);
  for (int ly = 0; ly < ny; ++ly) {
    const double eta = ly - ny / 2;
    for (int lxi = 0; lxi < nx; ++lxi) {
      const double xi = (lxi - nx / 2) * 2 * pi / lx;
      cd acc = 0;
      for (int m = 0; m < ny; ++m) {
        const double y = m * dy;
        for (int j = 0; j < nx; ++j) {
          const double x = -lx / 2 + j * dx;
          acc += std::polar(1.0, -(x * xi + y * eta)) * f[static_cast<std::size_t>(m) * nx + j];
        }
      }
      out[static_cast<std::size_t>(ly) * nx + lxi] = acc * dx * dy / (2 * pi);
    }
  }
  return out;
}

inline std::vector<cd> random_complex(std::size_t n, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  std::vector<cd> v(n);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

/// Free Schrodinger evolution of u0 = exp(-x^2/(2 a^2)) under i u_t + u_xx = 0:
/// u(t,x) = (1 + 2 i t / a^2)^(-1/2) exp(-x^2 / (2 a^2 (1 + 2 i t / a^2))).
inline cd free_gaussian(double a, double t, double x) {
  const cd q = 1.0 + cd(0.0, 2.0 * t / (a * a));
  return std::exp(-x * x / (2.0 * a * a * q)) / std::sqrt(q);
}

}  // namespace oracle
