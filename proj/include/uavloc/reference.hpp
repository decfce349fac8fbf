#pragma once

#include <memory>
#include <span>
#include <vector>

#include "uavloc/angular_spectrum.hpp"
#include "uavloc/covariance.hpp"
#include "uavloc/enhance.hpp"
#include "uavloc/geometry.hpp"

// Single-threaded counterparts of the OpenMP kernels, written as plain loops
// straight from the definitions. Tests hold the parallel versions to them;
// the benchmark target measures the gap.
namespace uavloc::reference {

// Per direction, per pair, per block: evaluate the weighted cross-correlation
// at the pair's fractional lag and sum. One inverse transform per block-pair
// instead of the batched one in the main kernel.
AngularSpectrum srp_serial(std::span<const SpectralBlock> blocks,
                           std::shared_ptr<const DirectionGrid> grid,
                           const ArrayGeometry& geom, const PairMask& mask,
                           const SrpOptions& opts = {});

AngularSpectrum gevd_music_serial(const SpatialCovariance& observed,
                                  const NoiseModel& noise,
                                  std::shared_ptr<const DirectionGrid> grid,
                                  const ArrayGeometry& geom, int n_sources,
                                  const MusicOptions& opts = {});

std::vector<SpectralBlock> mwf_serial(const std::vector<SpectralBlock>& blocks,
                                      const NoiseModel& noise, double mu = 1.0);

}  // namespace uavloc::reference
