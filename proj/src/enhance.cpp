#include "uavloc/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "uavloc/errors.hpp"
#include "uavloc/log.hpp"

namespace uavloc {

namespace {

void check_blocks(const std::vector<SpectralBlock>& blocks) {
  if (blocks.empty()) throw EmptyInput("no spectral blocks");
  for (const auto& b : blocks) {
    if (b.bins.size() != blocks[0].bins.size() ||
        b.bin_count() != blocks[0].bin_count())
      throw InconsistentBlocks("spectral blocks differ in shape");
  }
}

double block_energy(const SpectralBlock& b) {
  double e = 0.0;
  for (const auto& ch : b.bins)
    for (const auto& v : ch) e += std::norm(v);
  return e;
}

}  // namespace

bool TemplateBank::empty() const {
  for (const auto& m : motors)
    if (!m.empty()) return false;
  return true;
}

void TemplateBank::validate() const {
  if (empty()) throw EmptyTemplateBank("template bank has no entries");
  for (const auto& m : motors) {
    for (std::size_t k = 0; k + 1 < m.size(); ++k)
      if (!(m[k].rpm < m[k + 1].rpm))
        throw InvalidConfig("template bank speeds not strictly ascending");
    for (const auto& e : m)
      if (e.rpm < 0.0) throw InvalidConfig("negative template speed");
  }
}

namespace {

std::size_t checked_pair_count(int channels) {
  if (channels < 2) throw InvalidConfig("pair mask needs at least 2 channels");
  return static_cast<std::size_t>(channels) * (channels - 1) / 2;
}

}  // namespace

PairMask::PairMask(int channels, bool accept)
    : channels_(channels), accepted_(checked_pair_count(channels), accept ? 1 : 0) {}

int PairMask::index(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= channels_ || i == j)
    throw InvalidMicIndex("bad pair (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
  return i * channels_ - i * (i + 1) / 2 + (j - i - 1);
}

bool PairMask::accepted(int i, int j) const {
  return accepted_[index(i, j)] != 0;
}

void PairMask::set(int i, int j, bool value) {
  accepted_[index(i, j)] = value ? 1 : 0;
}

int PairMask::accepted_count() const {
  return static_cast<int>(std::count(accepted_.begin(), accepted_.end(), 1));
}

std::vector<std::pair<int, int>> PairMask::accepted_pairs() const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < channels_; ++i)
    for (int j = i + 1; j < channels_; ++j)
      if (accepted(i, j)) out.emplace_back(i, j);
  return out;
}

NoiseModel estimate_noise_vad(const std::vector<SpectralBlock>& blocks,
                              double energy_percentile) {
  check_blocks(blocks);
  if (blocks.size() < 10)
    throw TooFewFrames("need at least 10 frames for noise floor selection");
  if (energy_percentile > 1.0)
    throw InvalidConfig("energy percentile above 1");

  const int t = static_cast<int>(blocks.size());
  std::vector<std::pair<double, int>> energies(t);
  double total = 0.0;
  for (int k = 0; k < t; ++k) {
    energies[k] = {block_energy(blocks[k]), k};
    total += energies[k].first;
  }
  if (total <= 0.0) throw ZeroSignal("all frames are silent");

  const int keep = std::max(
      1, static_cast<int>(std::floor(energy_percentile * t)));
  std::sort(energies.begin(), energies.end());

  std::vector<SpectralBlock> quiet;
  quiet.reserve(keep);
  std::vector<int> order;
  for (int k = 0; k < keep; ++k) order.push_back(energies[k].second);
  std::sort(order.begin(), order.end());
  for (int idx : order) quiet.push_back(blocks[idx]);

  NoiseModel model;
  model.cov = accumulate_covariance(quiet, full_bin_range(blocks[0]));
  model.source = NoiseEstimator::Vad;
  return model;
}

namespace {

// Template power at the requested speed, linearly interpolated between the
// two nearest bank entries. Speeds within 20% of the hull span (20% of the
// edge speed for single-entry banks) clamp to the edge; anything farther is
// rejected.
std::vector<double> interpolate_motor(const std::vector<TemplateBank::Entry>& m,
                                      double rpm, int motor_index) {
  const double lo = m.front().rpm;
  const double hi = m.back().rpm;
  const double span = hi - lo;
  const double margin = span > 0.0 ? 0.2 * span : 0.2 * std::abs(hi);
  if (rpm < lo - margin || rpm > hi + margin)
    throw SpeedOutOfRange("motor " + std::to_string(motor_index) + " at " +
                          std::to_string(rpm) + " rpm is outside the bank [" +
                          std::to_string(lo) + ", " + std::to_string(hi) +
                          "] by more than 20%");
  if (rpm < lo || rpm > hi) {
    log_warn("clamping motor " + std::to_string(motor_index) + " speed " +
             std::to_string(rpm) + " rpm to the template bank hull");
    rpm = std::clamp(rpm, lo, hi);
  }

  auto upper = std::lower_bound(
      m.begin(), m.end(), rpm,
      [](const TemplateBank::Entry& e, double v) { return e.rpm < v; });
  if (upper == m.begin()) return m.front().power;
  if (upper == m.end()) return m.back().power;
  const auto& b = *upper;
  const auto& a = *(upper - 1);
  const double w = (rpm - a.rpm) / (b.rpm - a.rpm);
  std::vector<double> out(a.power.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = (1.0 - w) * a.power[k] + w * b.power[k];
  return out;
}

}  // namespace

NoiseModel estimate_noise_motor(const MotorProfile& profile, int fft_size,
                                int channels) {
  profile.bank.validate();
  if (channels < 1) throw InvalidConfig("channel count must be positive");
  const int bins = fft_size / 2 + 1;

  std::vector<double> power(bins, 0.0);
  for (int m = 0; m < profile.bank.motor_count() && m < 4; ++m) {
    if (profile.bank.motors[m].empty()) continue;
    const auto tpl = interpolate_motor(profile.bank.motors[m], profile.rpm[m], m);
    if (static_cast<int>(tpl.size()) != bins)
      throw ShapeMismatch("template bin count " + std::to_string(tpl.size()) +
                          " does not match fft size " +
                          std::to_string(fft_size));
    for (int k = 0; k < bins; ++k) power[k] += tpl[k];
  }

  NoiseModel model;
  model.cov.first_bin = 0;
  model.cov.bin_hz = profile.bank.bin_hz;
  model.cov.frame_count = 1;
  model.cov.mats.reserve(bins);
  for (int k = 0; k < bins; ++k)
    model.cov.mats.push_back(power[k] *
                             Eigen::MatrixXcd::Identity(channels, channels));
  model.source = NoiseEstimator::MotorTemplate;
  return model;
}

NoiseModel estimate_noise_recursive(const std::vector<SpectralBlock>& blocks,
                                    double alpha) {
  check_blocks(blocks);
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw InvalidAlpha("smoothing factor must be in [0, 1)");

  const int channels = static_cast<int>(blocks[0].bins.size());
  const int bins = blocks[0].bin_count();

  NoiseModel model;
  model.cov.first_bin = 0;
  model.cov.bin_hz = blocks[0].bin_hz;
  model.cov.frame_count = static_cast<int>(blocks.size());
  model.cov.mats.assign(bins, Eigen::MatrixXcd::Zero(channels, channels));

  Eigen::VectorXcd x(channels);
  for (const auto& block : blocks) {
    for (int k = 0; k < bins; ++k) {
      for (int c = 0; c < channels; ++c) x(c) = block.bins[c][k];
      auto& r = model.cov.mats[k];
      r = alpha * r + (1.0 - alpha) * (x * x.adjoint());
    }
  }
  for (auto& r : model.cov.mats) r = 0.5 * (r + r.adjoint()).eval();
  model.source = NoiseEstimator::Recursive;
  return model;
}

NoiseModel oracle_noise(const std::vector<SpectralBlock>& noise_blocks) {
  check_blocks(noise_blocks);
  NoiseModel model;
  model.cov = accumulate_covariance(noise_blocks, full_bin_range(noise_blocks[0]));
  model.source = NoiseEstimator::Oracle;
  return model;
}

MwfFilters mwf_design(const std::vector<SpectralBlock>& blocks,
                      const NoiseModel& noise, double mu) {
  check_blocks(blocks);
  if (mu < 0.0) throw InvalidConfig("regularization must be nonnegative");
  const int channels = static_cast<int>(blocks[0].bins.size());
  if (noise.cov.channel_count() != channels)
    throw ShapeMismatch("noise model channel count " +
                        std::to_string(noise.cov.channel_count()) +
                        " vs signal " + std::to_string(channels));

  const int bins = blocks[0].bin_count();
  const int lo = std::max(0, noise.cov.first_bin);
  const int hi = std::min(bins - 1, noise.cov.range().last());

  const SpatialCovariance observed =
      accumulate_covariance(blocks, BinRange{lo, hi - lo + 1});

  std::vector<Eigen::MatrixXcd> filters(hi - lo + 1);
  bool singular = false;
#pragma omp parallel for schedule(static) reduction(|| : singular)
  for (int k = lo; k <= hi; ++k) {
    const Eigen::MatrixXcd& phi_x = observed.at_bin(k);
    const Eigen::MatrixXcd& phi_n = noise.cov.at_bin(k);

    // PSD-cone projection of the source covariance estimate: clamp the
    // negative eigenvalues of (observed - noise) to zero.
    Eigen::MatrixXcd diff = phi_x - phi_n;
    diff = 0.5 * (diff + diff.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(diff);
    Eigen::VectorXd lam = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXcd phi_s = eig.eigenvectors() * lam.asDiagonal() *
                                   eig.eigenvectors().adjoint();

    Eigen::MatrixXcd denom = phi_s + mu * phi_n;
    const double load = 1e-9 * std::max(denom.real().trace() / channels, 0.0);
    if (denom.real().trace() <= 0.0) {
      filters[k - lo] = Eigen::MatrixXcd::Zero(channels, channels);
      continue;
    }
    denom += load * Eigen::MatrixXcd::Identity(channels, channels);
    Eigen::LDLT<Eigen::MatrixXcd> ldlt(denom);
    if (ldlt.info() != Eigen::Success) {
      singular = true;
      filters[k - lo] = Eigen::MatrixXcd::Zero(channels, channels);
      continue;
    }
    filters[k - lo] = ldlt.solve(phi_s);
  }
  if (singular)
    throw SingularNoiseCovariance("noise covariance not invertible after loading");

  return MwfFilters{std::move(filters), lo};
}

std::vector<SpectralBlock> mwf_apply(const std::vector<SpectralBlock>& blocks,
                                     const MwfFilters& filters) {
  check_blocks(blocks);
  const int channels = static_cast<int>(blocks[0].bins.size());
  if (!filters.w.empty() && filters.w[0].rows() != channels)
    throw ShapeMismatch("filter channel count " +
                        std::to_string(filters.w[0].rows()) + " vs signal " +
                        std::to_string(channels));

  const int lo = std::max(0, filters.first_bin);
  const int hi = std::min(blocks[0].bin_count() - 1, filters.range().last());

  std::vector<SpectralBlock> out = blocks;
  Eigen::VectorXcd x(channels), y(channels);
  for (auto& block : out) {
    for (int k = lo; k <= hi; ++k) {
      for (int c = 0; c < channels; ++c) x(c) = block.bins[c][k];
      y = filters.w[k - filters.first_bin].adjoint() * x;
      for (int c = 0; c < channels; ++c) block.bins[c][k] = y(c);
    }
  }
  return out;
}

std::vector<SpectralBlock> mwf(const std::vector<SpectralBlock>& blocks,
                               const NoiseModel& noise, double mu) {
  return mwf_apply(blocks, mwf_design(blocks, noise, mu));
}

namespace {

struct Biquad {
  double b0, b1, b2, a1, a2;  // a0 normalized to 1
};

// Highpass sections of a 4th-order Butterworth via the bilinear transform.
std::array<Biquad, 2> design_highpass(double cutoff_hz, double sample_rate) {
  const double wc = std::tan(std::numbers::pi * cutoff_hz / sample_rate);
  const std::array<double, 2> damping = {
      std::sin(std::numbers::pi / 8.0),  // cos(5 pi / 8) pole pair
      std::cos(std::numbers::pi / 8.0),  // cos(7 pi / 8) pole pair
  };
  std::array<Biquad, 2> sections{};
  for (int s = 0; s < 2; ++s) {
    const double a1 = 2.0 * wc * damping[s];
    const double a0 = wc * wc;
    const double d0 = 1.0 + a1 + a0;
    sections[s] = {1.0 / d0, -2.0 / d0, 1.0 / d0, (2.0 * a0 - 2.0) / d0,
                   (1.0 - a1 + a0) / d0};
  }
  return sections;
}

void filter_in_place(std::vector<double>& x, const Biquad& q) {
  double w1 = 0.0, w2 = 0.0;
  for (double& v : x) {
    const double w0 = v - q.a1 * w1 - q.a2 * w2;
    v = q.b0 * w0 + q.b1 * w1 + q.b2 * w2;
    w2 = w1;
    w1 = w0;
  }
}

}  // namespace

MultichannelRecording highpass(const MultichannelRecording& recording,
                               double cutoff_hz) {
  recording.validate();
  if (!(cutoff_hz > 0.0 && cutoff_hz < recording.sample_rate / 2.0))
    throw InvalidCutoff("cutoff must lie in (0, sample_rate/2)");

  const auto sections = design_highpass(cutoff_hz, recording.sample_rate);
  const std::size_t n = recording.length();
  const std::size_t pad = std::min<std::size_t>(n - 1, 2000);

  MultichannelRecording out = recording;
  std::vector<double> work;
  for (auto& channel : out.samples) {
    work.assign(n + 2 * pad, 0.0);
    // Odd reflection about both endpoints keeps low-order trends continuous
    // so the filter transient dies out inside the padding.
    for (std::size_t k = 0; k < pad; ++k)
      work[k] = 2.0 * channel[0] - channel[pad - k];
    std::copy(channel.begin(), channel.end(), work.begin() + pad);
    for (std::size_t k = 0; k < pad; ++k)
      work[pad + n + k] = 2.0 * channel[n - 1] - channel[n - 2 - k];

    for (const auto& q : sections) filter_in_place(work, q);
    std::reverse(work.begin(), work.end());
    for (const auto& q : sections) filter_in_place(work, q);
    std::reverse(work.begin(), work.end());

    std::copy(work.begin() + pad, work.begin() + pad + n, channel.begin());
  }
  return out;
}

PairMask select_pairs(const std::vector<SpectralBlock>& blocks,
                      const NoiseModel& noise, double snr_floor_db) {
  check_blocks(blocks);
  const int channels = static_cast<int>(blocks[0].bins.size());
  if (channels < 2) throw InvalidConfig("pair selection needs >= 2 channels");
  if (noise.cov.channel_count() != channels)
    throw ShapeMismatch("noise model channel count mismatch");

  const int bins = blocks[0].bin_count();
  const int lo = std::max(0, noise.cov.first_bin);
  const int hi = std::min(bins - 1, noise.cov.range().last());

  // Mean per-frame energy per channel over the shared band, and the noise
  // model's prediction of it.
  std::vector<double> measured(channels, 0.0), floor(channels, 0.0);
  for (const auto& block : blocks)
    for (int c = 0; c < channels; ++c)
      for (int k = lo; k <= hi; ++k) measured[c] += std::norm(block.bins[c][k]);
  for (int c = 0; c < channels; ++c) {
    measured[c] /= static_cast<double>(blocks.size());
    for (int k = lo; k <= hi; ++k)
      floor[c] += std::real(noise.cov.at_bin(k)(c, c));
  }

  PairMask mask(channels, false);
  double best_snr = -std::numeric_limits<double>::infinity();
  std::pair<int, int> best_pair{0, 1};
  for (int i = 0; i < channels; ++i) {
    for (int j = i + 1; j < channels; ++j) {
      const double sig = std::max(measured[i] - floor[i], 0.0) +
                         std::max(measured[j] - floor[j], 0.0);
      const double nse = floor[i] + floor[j];
      double snr_db;
      if (nse <= 0.0)
        snr_db = std::numeric_limits<double>::infinity();
      else if (sig <= 0.0)
        snr_db = -std::numeric_limits<double>::infinity();
      else
        snr_db = 10.0 * std::log10(sig / nse);
      if (snr_db >= snr_floor_db) mask.set(i, j, true);
      if (snr_db > best_snr) {
        best_snr = snr_db;
        best_pair = {i, j};
      }
    }
  }
  if (mask.accepted_count() == 0) {
    log_warn("no pair cleared the SNR floor; keeping the best one");
    mask.set(best_pair.first, best_pair.second, true);
  }
  return mask;
}

}  // namespace uavloc
