#include "uavloc/reference.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "uavloc/errors.hpp"

namespace uavloc::reference {

AngularSpectrum srp_serial(std::span<const SpectralBlock> blocks,
                           std::shared_ptr<const DirectionGrid> grid,
                           const ArrayGeometry& geom, const PairMask& mask,
                           const SrpOptions& opts) {
  if (blocks.empty()) throw EmptyInput("no spectral blocks");
  if (!grid || grid->size() == 0) throw EmptyInput("empty direction grid");
  const int channels = blocks[0].channel_count();
  if (mask.channels() != channels || geom.mic_count() != channels)
    throw ShapeMismatch(
        "channel count disagrees between blocks, mask, and geometry");
  const auto pairs = mask.accepted_pairs();
  if (pairs.empty()) throw EmptyInput("no accepted microphone pairs");
  const double sample_rate = blocks[0].sample_rate();

  std::vector<std::vector<GccResult>> per_pair(pairs.size());
  long usable = 0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    for (const auto& block : blocks) {
      try {
        per_pair[p].push_back(gcc(block.bins[pairs[p].first],
                                  block.bins[pairs[p].second], sample_rate,
                                  opts.gcc));
        ++usable;
      } catch (const InsufficientEnergy&) {
      }
    }
  }
  if (usable == 0)
    throw InsufficientEnergy("every block-pair was below the energy floor");

  AngularSpectrum spectrum;
  spectrum.grid = grid;
  spectrum.first_block = blocks[0].frame_index;
  spectrum.block_count = static_cast<int>(blocks.size());
  spectrum.scores.assign(grid->size(), 0.0);
  for (std::size_t d = 0; d < grid->size(); ++d) {
    double score = 0.0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const double lag = tdoa_seconds(grid->directions[d], geom,
                                      pairs[p].first, pairs[p].second) *
                         sample_rate;
      for (const auto& g : per_pair[p]) score += g.interpolate(lag);
    }
    spectrum.scores[d] = score;
  }
  return spectrum;
}

AngularSpectrum gevd_music_serial(const SpatialCovariance& observed,
                                  const NoiseModel& noise,
                                  std::shared_ptr<const DirectionGrid> grid,
                                  const ArrayGeometry& geom, int n_sources,
                                  const MusicOptions& opts) {
  if (!grid || grid->size() == 0) throw EmptyInput("empty direction grid");
  const int m = observed.channel_count();
  if (m == 0) throw EmptyInput("empty covariance");
  if (geom.mic_count() != m)
    throw ShapeMismatch("geometry does not match the covariance channel count");
  if (noise.cov.channel_count() != m)
    throw ShapeMismatch(
        "noise model does not match the covariance channel count");
  if (n_sources < 1 || n_sources >= m)
    throw InvalidSourceCount("source count must be in [1, channels)");

  const BinRange band =
      bins_for_band(opts.band_lo_hz, opts.band_hi_hz, observed.bin_hz,
                    observed.first_bin + observed.bin_count());
  const int lo =
      std::max({band.first, observed.first_bin, noise.cov.first_bin});
  const int hi = std::min(
      {band.last(), observed.range().last(), noise.cov.range().last()});
  if (lo > hi) throw InvalidConfig("no frequency bins shared by inputs and band");
  const int used = hi - lo + 1;

  std::vector<Eigen::MatrixXcd> inverse_l(used), noise_basis(used);
  for (int k = lo; k <= hi; ++k) {
    const Eigen::MatrixXcd& phi_n = noise.cov.at_bin(k);
    const double tr = phi_n.real().trace();
    Eigen::MatrixXcd l = Eigen::MatrixXcd::Identity(m, m);
    if (tr > 0.0) {
      Eigen::LLT<Eigen::MatrixXcd> llt(
          phi_n + (1e-9 * tr / m) * Eigen::MatrixXcd::Identity(m, m));
      if (llt.info() != Eigen::Success)
        throw SingularNoiseCovariance(
            "noise covariance not factorable after loading");
      l = llt.matrixL();
    }
    inverse_l[k - lo] = l.inverse();

    Eigen::MatrixXcd s =
        inverse_l[k - lo] * observed.at_bin(k) * inverse_l[k - lo].adjoint();
    s = 0.5 * (s + s.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(s);
    noise_basis[k - lo] = eig.eigenvectors().leftCols(m - n_sources);
  }

  AngularSpectrum spectrum;
  spectrum.grid = grid;
  spectrum.first_block = 0;
  spectrum.block_count = observed.frame_count;
  spectrum.scores.assign(grid->size(), 0.0);
  for (std::size_t d = 0; d < grid->size(); ++d) {
    double score = 0.0;
    for (int k = lo; k <= hi; ++k) {
      const Eigen::VectorXcd v =
          steering_vector(grid->directions[d], geom, k * observed.bin_hz);
      Eigen::VectorXcd w = inverse_l[k - lo] * v;
      w.normalize();
      const double p = (noise_basis[k - lo].adjoint() * w).squaredNorm();
      score += 1.0 / std::max(p, 1e-12);
    }
    spectrum.scores[d] = score / used;
  }
  return spectrum;
}

std::vector<SpectralBlock> mwf_serial(const std::vector<SpectralBlock>& blocks,
                                      const NoiseModel& noise, double mu) {
  if (blocks.empty()) throw EmptyInput("no spectral blocks");
  if (mu < 0.0) throw InvalidConfig("regularization must be nonnegative");
  const int channels = blocks[0].channel_count();
  if (noise.cov.channel_count() != channels)
    throw ShapeMismatch("noise model does not match the block channel count");

  const int bins = blocks[0].bin_count();
  const int lo = std::max(0, noise.cov.first_bin);
  const int hi = std::min(bins - 1, noise.cov.range().last());
  const SpatialCovariance observed =
      accumulate_covariance(blocks, BinRange{lo, hi - lo + 1});

  std::vector<SpectralBlock> out = blocks;
  for (int k = lo; k <= hi; ++k) {
    const Eigen::MatrixXcd& phi_x = observed.at_bin(k);
    const Eigen::MatrixXcd& phi_n = noise.cov.at_bin(k);

    Eigen::MatrixXcd diff = phi_x - phi_n;
    diff = 0.5 * (diff + diff.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(diff);
    const Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXcd phi_s = eig.eigenvectors() * lam.asDiagonal() *
                                   eig.eigenvectors().adjoint();

    Eigen::MatrixXcd denom = phi_s + mu * phi_n;
    Eigen::MatrixXcd filter = Eigen::MatrixXcd::Zero(channels, channels);
    if (denom.real().trace() > 0.0) {
      denom += (1e-9 * denom.real().trace() / channels) *
               Eigen::MatrixXcd::Identity(channels, channels);
      Eigen::LDLT<Eigen::MatrixXcd> ldlt(denom);
      if (ldlt.info() != Eigen::Success)
        throw SingularNoiseCovariance(
            "noise covariance not invertible after loading");
      filter = ldlt.solve(phi_s);
    }

    for (auto& block : out) {
      Eigen::VectorXcd x(channels);
      for (int c = 0; c < channels; ++c) x(c) = block.bins[c][k];
      const Eigen::VectorXcd y = filter.adjoint() * x;
      for (int c = 0; c < channels; ++c) block.bins[c][k] = y(c);
    }
  }
  return out;
}

}  // namespace uavloc::reference
