#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "uavloc/covariance.hpp"
#include "uavloc/enhance.hpp"
#include "uavloc/geometry.hpp"
#include "uavloc/stft.hpp"

namespace uavloc {

enum class GccWeighting { Phat, Nonlin };

struct GccOptions {
  GccWeighting weighting = GccWeighting::Phat;
  double gamma = 0.3;  // magnitude compression exponent for Nonlin
  // Cross-spectrum bins outside this band are zeroed before the inverse
  // transform.
  double band_lo_hz = 100.0;
  double band_hi_hz = 8000.0;
};

// Cross-correlation indexed by integer lag in [-fft_size/2, fft_size/2).
// Positive lag means channel j lags channel i (j hears the source later).
struct GccResult {
  std::vector<double> corr;  // circular order: index l holds lag l mod N
  double sample_rate = 0.0;

  int fft_size() const { return static_cast<int>(corr.size()); }
  double at_lag(int lag) const;
  // Linear interpolation between the two neighboring integer lags.
  double interpolate(double lag) const;
};

GccResult gcc(std::span<const std::complex<double>> spectrum_i,
              std::span<const std::complex<double>> spectrum_j,
              double sample_rate, const GccOptions& opts = {});

// Score per grid direction, summarizing the blocks it was computed from.
struct AngularSpectrum {
  std::vector<double> scores;
  std::shared_ptr<const DirectionGrid> grid;
  int first_block = 0;
  int block_count = 0;

  std::size_t size() const { return scores.size(); }
};

// Sentinel for masked-out grid points; every comparison still works and any
// real score beats it.
double masked_score();

enum class LocalizationMethod { SrpPhat, SrpNonlin, GevdMusic };

struct LocalizationEstimate {
  Direction direction;
  double confidence = 0.0;
  LocalizationMethod method = LocalizationMethod::SrpPhat;
};

struct SrpOptions {
  GccOptions gcc;
};

// Steered-response power: per accepted pair, cross-correlations are summed
// over blocks, then each direction reads the summed sequence at its
// fractional pair lag. Block-pairs without usable cross-spectrum energy are
// skipped; only an entirely silent input is an error.
AngularSpectrum srp(std::span<const SpectralBlock> blocks,
                    std::shared_ptr<const DirectionGrid> grid,
                    const ArrayGeometry& geom, const PairMask& mask,
                    const SrpOptions& opts = {});

struct MusicDiagnostics {
  // Bins where the two largest whitened eigenvalues are within 10% of each
  // other, making the signal/noise subspace split unreliable.
  int degenerate_bins = 0;
  int bins_used = 0;
};

struct MusicOptions {
  double band_lo_hz = 100.0;
  double band_hi_hz = 8000.0;
};

// MUSIC on noise-whitened statistics. The noise covariance is Cholesky
// factored per bin (diagonal loading first); the observed covariance is
// whitened with it, and the noise subspace is spanned by the trailing
// eigenvectors. Scores average 1/||E_n^H v||^2 over bins with v the whitened
// unit-norm steering vector.
AngularSpectrum gevd_music(const SpatialCovariance& observed,
                           const NoiseModel& noise,
                           std::shared_ptr<const DirectionGrid> grid,
                           const ArrayGeometry& geom, int n_sources,
                           const MusicOptions& opts = {},
                           MusicDiagnostics* diag = nullptr);

// Grid dilation: each score becomes the maximum over grid points within the
// great-circle radius. Radius 0 is the identity.
AngularSpectrum max_filter(const AngularSpectrum& spectrum, double radius_deg);

// Suppress grid points within the radius of any rotor direction.
AngularSpectrum mask_rotors(const AngularSpectrum& spectrum,
                            std::span<const Direction> rotor_dirs,
                            double radius_deg);

// Grid argmax; ties break toward the lowest grid index.
LocalizationEstimate pick_peak(const AngularSpectrum& spectrum,
                               LocalizationMethod method = LocalizationMethod::SrpPhat);

// Local maxima (against the 1-ring grid neighborhood) ranked by score.
std::vector<LocalizationEstimate> top_peaks(const AngularSpectrum& spectrum,
                                            int count);

// Fuse per-block estimates: top peaks per spectrum feed a spherical k-means
// (means renormalized each iteration); the centroid of the most populated
// cluster wins. Collapsed means fall back to their strongest member.
Direction cluster_estimates(std::span<const AngularSpectrum> spectra, int k,
                            int top_m);

}  // namespace uavloc
