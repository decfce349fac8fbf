#include "uavloc/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>

#include "uavloc/errors.hpp"

namespace uavloc {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

struct RealFft::Impl {
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

RealFft::RealFft(int size) : impl_(new Impl), size_(size) {
  if (size < 2) {
    delete impl_;
    throw InvalidConfig("fft size must be >= 2, got " + std::to_string(size));
  }
  std::lock_guard<std::mutex> lock(planner_mutex());
  impl_->real = fftw_alloc_real(size);
  impl_->spec = fftw_alloc_complex(size / 2 + 1);
  impl_->fwd = fftw_plan_dft_r2c_1d(size, impl_->real, impl_->spec,
                                    FFTW_ESTIMATE);
  impl_->inv = fftw_plan_dft_c2r_1d(size, impl_->spec, impl_->real,
                                    FFTW_ESTIMATE);
}

RealFft::~RealFft() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(impl_->fwd);
  fftw_destroy_plan(impl_->inv);
  fftw_free(impl_->real);
  fftw_free(impl_->spec);
  delete impl_;
}

void RealFft::forward(std::span<const double> in,
                      std::span<std::complex<double>> out) {
  if (static_cast<int>(in.size()) != size_ ||
      static_cast<int>(out.size()) != bin_count())
    throw ShapeMismatch("fft forward: buffer sizes do not match plan");
  std::copy(in.begin(), in.end(), impl_->real);
  fftw_execute(impl_->fwd);
  for (int k = 0; k < bin_count(); ++k)
    out[k] = {impl_->spec[k][0], impl_->spec[k][1]};
}

void RealFft::inverse(std::span<const std::complex<double>> in,
                      std::span<double> out) {
  if (static_cast<int>(in.size()) != bin_count() ||
      static_cast<int>(out.size()) != size_)
    throw ShapeMismatch("fft inverse: buffer sizes do not match plan");
  for (int k = 0; k < bin_count(); ++k) {
    impl_->spec[k][0] = in[k].real();
    impl_->spec[k][1] = in[k].imag();
  }
  fftw_execute(impl_->inv);
  const double scale = 1.0 / size_;
  for (int n = 0; n < size_; ++n) out[n] = impl_->real[n] * scale;
}

}  // namespace uavloc
