// fft_workspace.hpp (internal)
// RAII ownership of FFTW plans and aligned buffers for one grid shape, plus the
// index/phase bookkeeping that maps FFTW's natural ordering onto the centered
// storage and continuum normalization used by SpectralField.
#pragma once

#include <fftw3.h>

#include <complex>
#include <mutex>
#include <cstddef>
#include <span>
#include <vector>

#include "cylnls/spectral_domain.hpp"

namespace cylnls::detail {

/// FFTW's planner is not thread safe; every plan create/destroy takes this lock.
std::mutex& planner_mutex();

class FftBuffer {
 public:
  explicit FftBuffer(std::size_t n);
  ~FftBuffer();
  FftBuffer(const FftBuffer&) = delete;
  FftBuffer& operator=(const FftBuffer&) = delete;

  fftw_complex* raw() { return data_; }
  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(data_); }
  std::span<std::complex<double>> span() { return {data(), n_}; }
  std::size_t size() const { return n_; }

 private:
  fftw_complex* data_;
  std::size_t n_;
};

/// Forward/backward 2D plans for an (ny x nx) row-major array. Plans are built
/// once with FFTW_ESTIMATE so results are bitwise reproducible run to run.
class FftWorkspace {
 public:
  explicit FftWorkspace(const Grid& g);
  ~FftWorkspace();
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;

  const Grid& grid() const { return grid_; }

  /// Physical values -> continuum-normalized centered coefficients.
  void forward(std::span<const Complex> physical, std::span<Complex> spectral);
  /// Centered coefficients -> physical values.
  void inverse(std::span<const Complex> spectral, std::span<Complex> physical);

  /// Position in FFTW order of each centered storage index.
  const std::vector<std::size_t>& fft_index() const { return fft_index_; }

 private:
  Grid grid_;
  FftBuffer in_;
  FftBuffer out_;
  fftw_plan forward_plan_;
  fftw_plan backward_plan_;
  std::vector<std::size_t> fft_index_;
  std::vector<double> sign_;  // (-1)^kx from the box offset x_0 = -L/2
};

}  // namespace cylnls::detail
