#pragma once

#include <complex>
#include <span>
#include <vector>

namespace uavloc {

// Real-input FFT of a fixed size, backed by FFTW. One instance owns its
// plans and scratch buffers and is not safe for concurrent use; construct
// one per thread. Plan creation is serialized internally (FFTW's planner is
// not thread-safe).
class RealFft {
 public:
  explicit RealFft(int size);
  ~RealFft();

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  int size() const { return size_; }
  int bin_count() const { return size_ / 2 + 1; }

  // Unnormalized DFT of a real frame; out has size/2+1 one-sided bins.
  void forward(std::span<const double> in, std::span<std::complex<double>> out);

  // Inverse of forward including the 1/N factor; reconstructs a real frame
  // from one-sided bins (conjugate symmetry implied).
  void inverse(std::span<const std::complex<double>> in, std::span<double> out);

 private:
  struct Impl;
  Impl* impl_;
  int size_;
};

bool is_power_of_two(int n);

}  // namespace uavloc
