#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "uavloc/stft.hpp"

namespace uavloc {

// Contiguous run of one-sided FFT bins.
struct BinRange {
  int first = 0;
  int count = 0;

  int last() const { return first + count - 1; }
};

// Bins whose center frequencies fall inside [lo_hz, hi_hz], clipped to the
// available bin count.
BinRange bins_for_band(double lo_hz, double hi_hz, double bin_hz,
                       int bin_count);

BinRange full_bin_range(const SpectralBlock& block);

// Per-bin channel x channel second-order statistics averaged over frames.
struct SpatialCovariance {
  std::vector<Eigen::MatrixXcd> mats;  // one Hermitian matrix per bin
  int first_bin = 0;
  double bin_hz = 0.0;
  int frame_count = 0;

  int bin_count() const { return static_cast<int>(mats.size()); }
  int channel_count() const {
    return mats.empty() ? 0 : static_cast<int>(mats[0].rows());
  }
  BinRange range() const { return {first_bin, bin_count()}; }
  const Eigen::MatrixXcd& at_bin(int absolute_bin) const {
    return mats[absolute_bin - first_bin];
  }
};

// (1/T) sum_t x_t x_t^H per bin over the given range; Hermitian by
// construction.
SpatialCovariance accumulate_covariance(std::span<const SpectralBlock> blocks,
                                        const BinRange& range);

}  // namespace uavloc
