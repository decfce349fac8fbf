#include "uavloc/covariance.hpp"

#include <algorithm>
#include <cmath>

#include "uavloc/errors.hpp"

namespace uavloc {

BinRange bins_for_band(double lo_hz, double hi_hz, double bin_hz,
                       int bin_count) {
  if (bin_hz <= 0.0) throw InvalidConfig("bin_hz must be > 0");
  if (hi_hz < lo_hz) throw InvalidConfig("band upper edge below lower edge");
  int first = static_cast<int>(std::ceil(lo_hz / bin_hz));
  int last = static_cast<int>(std::floor(hi_hz / bin_hz));
  first = std::clamp(first, 0, bin_count - 1);
  last = std::clamp(last, 0, bin_count - 1);
  if (last < first) return {first, 0};
  return {first, last - first + 1};
}

BinRange full_bin_range(const SpectralBlock& block) {
  return {0, block.bin_count()};
}

SpatialCovariance accumulate_covariance(std::span<const SpectralBlock> blocks,
                                        const BinRange& range) {
  if (blocks.empty()) throw EmptyInput("no blocks to accumulate");
  const int channels = blocks[0].channel_count();
  const int bins = blocks[0].bin_count();
  if (range.first < 0 || range.count <= 0 || range.first + range.count > bins)
    throw InvalidConfig("bin range outside block spectrum");
  for (const SpectralBlock& b : blocks)
    if (b.channel_count() != channels || b.bin_count() != bins)
      throw InconsistentBlocks("blocks disagree on shape");

  SpatialCovariance cov;
  cov.first_bin = range.first;
  cov.bin_hz = blocks[0].bin_hz;
  cov.frame_count = static_cast<int>(blocks.size());
  cov.mats.assign(range.count, Eigen::MatrixXcd::Zero(channels, channels));

  Eigen::VectorXcd x(channels);
  for (const SpectralBlock& b : blocks) {
    for (int k = 0; k < range.count; ++k) {
      const int bin = range.first + k;
      for (int c = 0; c < channels; ++c) x(c) = b.bins[c][bin];
      cov.mats[k].noalias() += x * x.adjoint();
    }
  }
  const double scale = 1.0 / static_cast<double>(blocks.size());
  for (Eigen::MatrixXcd& m : cov.mats) {
    m *= scale;
    // Force exact Hermitian symmetry; accumulation already is up to rounding.
    m = ((m + m.adjoint()) * 0.5).eval();
  }
  return cov;
}

}  // namespace uavloc
