#pragma once

#include <array>
#include <utility>
#include <vector>

#include "uavloc/covariance.hpp"
#include "uavloc/recording.hpp"
#include "uavloc/stft.hpp"

namespace uavloc {

enum class NoiseEstimator { Vad, MotorTemplate, Recursive, Oracle };

struct NoiseModel {
  SpatialCovariance cov;
  NoiseEstimator source = NoiseEstimator::Oracle;
};

// Per-motor noise power spectra measured at a set of reference speeds.
// Entries per motor are kept sorted by rpm ascending.
struct TemplateBank {
  struct Entry {
    double rpm = 0.0;
    std::vector<double> power;  // one value per frequency bin
  };
  std::vector<std::vector<Entry>> motors;
  double bin_hz = 0.0;

  int motor_count() const { return static_cast<int>(motors.size()); }
  bool empty() const;
  void validate() const;
};

struct MotorProfile {
  std::array<double, 4> rpm{0.0, 0.0, 0.0, 0.0};
  TemplateBank bank;
};

// Accept/reject state per unordered microphone pair (i < j).
class PairMask {
 public:
  PairMask() = default;
  explicit PairMask(int channels, bool accept = true);

  int channels() const { return channels_; }
  int pair_count() const { return static_cast<int>(accepted_.size()); }
  bool accepted(int i, int j) const;
  void set(int i, int j, bool value);
  int accepted_count() const;
  std::vector<std::pair<int, int>> accepted_pairs() const;

 private:
  int index(int i, int j) const;
  int channels_ = 0;
  std::vector<char> accepted_;
};

// Noise statistics from the quietest fraction of frames. The threshold is the
// given percentile of the broadband per-frame energy distribution; at least
// one frame is always kept.
NoiseModel estimate_noise_vad(const std::vector<SpectralBlock>& blocks,
                              double energy_percentile = 0.3);

// Noise statistics from per-motor templates, interpolated linearly between
// the two nearest bank speeds and summed over the four motors. The covariance
// is diagonal per bin (templates carry power only, no inter-channel phase).
// Speeds are clamped to the bank hull when within a 20% margin of it and
// rejected beyond that.
NoiseModel estimate_noise_motor(const MotorProfile& profile, int fft_size,
                                int channels);

// Exponential per-bin averaging R_t = alpha R_{t-1} + (1 - alpha) x x^H with
// R_0 = 0; returns the final R. alpha = 0 degenerates to the last frame's
// outer product, so the accepted range is [0, 1).
NoiseModel estimate_noise_recursive(const std::vector<SpectralBlock>& blocks,
                                    double alpha);

// Noise statistics accumulated from a noise-only reference signal.
NoiseModel oracle_noise(const std::vector<SpectralBlock>& noise_blocks);

// Per-bin multichannel Wiener filter matrices, reusable on any signal that
// shares the mixture's statistics (e.g. its clean and noise components).
struct MwfFilters {
  std::vector<Eigen::MatrixXcd> w;  // one matrix per bin in the range
  int first_bin = 0;

  BinRange range() const { return {first_bin, static_cast<int>(w.size())}; }
};

// Designs the filters from the observed blocks: per bin the source
// covariance is the PSD-cone projection of (observed - noise), and
// W = (Phi_s + mu Phi_n)^-1 Phi_s.
MwfFilters mwf_design(const std::vector<SpectralBlock>& blocks,
                      const NoiseModel& noise, double mu = 1.0);

// y = W^H x per frame and bin. Bins outside the filter range pass through
// untouched.
std::vector<SpectralBlock> mwf_apply(const std::vector<SpectralBlock>& blocks,
                                     const MwfFilters& filters);

// mwf_apply(blocks, mwf_design(blocks, noise, mu)).
std::vector<SpectralBlock> mwf(const std::vector<SpectralBlock>& blocks,
                               const NoiseModel& noise, double mu = 1.0);

// Zero-phase highpass: 4th-order Butterworth run forward and backward over
// each channel (8th-order magnitude, no phase distortion). Input edges are
// extended by odd reflection before filtering.
MultichannelRecording highpass(const MultichannelRecording& recording,
                               double cutoff_hz);

// Keep microphone pairs whose estimated SNR clears the floor. Per channel the
// signal energy is the measured in-band energy minus the noise model's, so a
// channel dominated by noise scores low no matter how loud. If every pair
// fails the floor, the single best pair is retained.
PairMask select_pairs(const std::vector<SpectralBlock>& blocks,
                      const NoiseModel& noise, double snr_floor_db);

}  // namespace uavloc
