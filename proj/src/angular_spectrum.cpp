#include "uavloc/angular_spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "uavloc/errors.hpp"
#include "uavloc/fft.hpp"
#include "uavloc/log.hpp"

namespace uavloc {

namespace {

constexpr double kEnergyFloor = 1e-12;

// Applies the chosen weighting to the cross-spectrum of one block pair and
// adds it into acc. Returns the number of bins with usable energy.
int accumulate_weighted_cross(std::span<const std::complex<double>> si,
                              std::span<const std::complex<double>> sj,
                              const GccOptions& opts, double bin_hz,
                              std::vector<std::complex<double>>& acc) {
  const int bins = static_cast<int>(si.size());
  const BinRange band =
      bins_for_band(opts.band_lo_hz, opts.band_hi_hz, bin_hz, bins);
  int usable = 0;
  for (int k = band.first; k <= band.last(); ++k) {
    const std::complex<double> c = sj[k] * std::conj(si[k]);
    const double mag = std::abs(c);
    if (mag < kEnergyFloor) continue;
    ++usable;
    if (opts.weighting == GccWeighting::Phat)
      acc[k] += c / mag;
    else
      acc[k] += c * std::pow(mag, opts.gamma - 1.0);
  }
  return usable;
}

std::vector<double> inverse_cross_spectrum(
    const std::vector<std::complex<double>>& cross, int fft_size) {
  RealFft fft(fft_size);
  std::vector<double> corr(fft_size);
  fft.inverse(cross, corr);
  return corr;
}

}  // namespace

double GccResult::at_lag(int lag) const {
  const int n = fft_size();
  return corr[((lag % n) + n) % n];
}

double GccResult::interpolate(double lag) const {
  const double lo = std::floor(lag);
  const double frac = lag - lo;
  const int base = static_cast<int>(lo);
  return (1.0 - frac) * at_lag(base) + frac * at_lag(base + 1);
}

GccResult gcc(std::span<const std::complex<double>> spectrum_i,
              std::span<const std::complex<double>> spectrum_j,
              double sample_rate, const GccOptions& opts) {
  if (spectrum_i.size() != spectrum_j.size())
    throw ShapeMismatch("cross-correlation inputs differ in bin count");
  if (spectrum_i.size() < 2) throw InvalidConfig("spectrum too short");
  if (sample_rate <= 0.0) throw InvalidConfig("sample rate must be positive");

  const int bins = static_cast<int>(spectrum_i.size());
  const int fft_size = 2 * (bins - 1);
  const double bin_hz = sample_rate / fft_size;

  std::vector<std::complex<double>> cross(bins, {0.0, 0.0});
  const int usable =
      accumulate_weighted_cross(spectrum_i, spectrum_j, opts, bin_hz, cross);
  if (usable == 0)
    throw InsufficientEnergy("cross-spectrum below the energy floor everywhere");

  GccResult out;
  out.sample_rate = sample_rate;
  out.corr = inverse_cross_spectrum(cross, fft_size);
  return out;
}

double masked_score() { return std::numeric_limits<double>::lowest(); }

AngularSpectrum srp(std::span<const SpectralBlock> blocks,
                    std::shared_ptr<const DirectionGrid> grid,
                    const ArrayGeometry& geom, const PairMask& mask,
                    const SrpOptions& opts) {
  if (blocks.empty()) throw EmptyInput("no spectral blocks");
  if (!grid || grid->size() == 0) throw EmptyInput("empty direction grid");
  const int channels = blocks[0].channel_count();
  if (mask.channels() != channels || geom.mic_count() != channels)
    throw ShapeMismatch("channel count disagrees between blocks, mask, and geometry");
  const auto pairs = mask.accepted_pairs();
  if (pairs.empty()) throw EmptyInput("no accepted microphone pairs");

  const int bins = blocks[0].bin_count();
  const int fft_size = blocks[0].fft_size();
  const double sample_rate = blocks[0].sample_rate();

  // Weighted cross-spectra summed over blocks, one inverse transform per
  // pair. The per-direction lookup is linear in the correlation values, so
  // summing first changes nothing.
  std::vector<GccResult> summed(pairs.size());
  long skipped = 0, total = 0;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    std::vector<std::complex<double>> acc(bins, {0.0, 0.0});
    for (const auto& block : blocks) {
      if (block.bin_count() != bins || block.channel_count() != channels)
        throw InconsistentBlocks("spectral blocks differ in shape");
      const int usable = accumulate_weighted_cross(
          block.bins[pairs[p].first], block.bins[pairs[p].second], opts.gcc,
          block.bin_hz, acc);
      ++total;
      if (usable == 0) ++skipped;
    }
    summed[p].sample_rate = sample_rate;
    summed[p].corr = inverse_cross_spectrum(acc, fft_size);
  }
  if (skipped == total)
    throw InsufficientEnergy("every block-pair was below the energy floor");
  if (skipped > 0)
    log_debug("srp skipped " + std::to_string(skipped) + " of " +
              std::to_string(total) + " block-pairs");

  // Pair TDOA as a dot product: lag(d) = u(d) . pair_lag[p].
  std::vector<Eigen::Vector3d> pair_lag(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p)
    pair_lag[p] = (geom.mic_positions[pairs[p].first] -
                   geom.mic_positions[pairs[p].second]) *
                  (sample_rate / geom.speed_of_sound);

  AngularSpectrum spectrum;
  spectrum.grid = grid;
  spectrum.first_block = blocks[0].frame_index;
  spectrum.block_count = static_cast<int>(blocks.size());
  spectrum.scores.assign(grid->size(), 0.0);

  const long n = static_cast<long>(grid->size());
#pragma omp parallel for schedule(static)
  for (long d = 0; d < n; ++d) {
    const Eigen::Vector3d& u = grid->units[d];
    double score = 0.0;
    for (std::size_t p = 0; p < pairs.size(); ++p)
      score += summed[p].interpolate(u.dot(pair_lag[p]));
    spectrum.scores[d] = score;
  }
  return spectrum;
}

AngularSpectrum gevd_music(const SpatialCovariance& observed,
                           const NoiseModel& noise,
                           std::shared_ptr<const DirectionGrid> grid,
                           const ArrayGeometry& geom, int n_sources,
                           const MusicOptions& opts, MusicDiagnostics* diag) {
  if (!grid || grid->size() == 0) throw EmptyInput("empty direction grid");
  const int m = observed.channel_count();
  if (m == 0) throw EmptyInput("empty covariance");
  if (geom.mic_count() != m)
    throw ShapeMismatch("geometry does not match the covariance channel count");
  if (noise.cov.channel_count() != m)
    throw ShapeMismatch("noise model does not match the covariance channel count");
  if (n_sources < 1 || n_sources >= m)
    throw InvalidSourceCount("source count must be in [1, channels)");

  const BinRange band = bins_for_band(opts.band_lo_hz, opts.band_hi_hz,
                                      observed.bin_hz,
                                      observed.first_bin + observed.bin_count());
  const int lo = std::max({band.first, observed.first_bin, noise.cov.first_bin});
  const int hi = std::min({band.last(), observed.range().last(),
                           noise.cov.range().last()});
  if (lo > hi) throw InvalidConfig("no frequency bins shared by inputs and band");
  const int used = hi - lo + 1;

  std::vector<Eigen::MatrixXcd> whiteners(used), noise_basis(used);
  int degenerate = 0;
  bool singular = false;
#pragma omp parallel for schedule(static) reduction(+ : degenerate) \
    reduction(|| : singular)
  for (int k = lo; k <= hi; ++k) {
    const Eigen::MatrixXcd& phi_n = noise.cov.at_bin(k);
    const double tr = phi_n.real().trace();
    Eigen::MatrixXcd l;
    if (tr <= 0.0) {
      l = Eigen::MatrixXcd::Identity(m, m);
    } else {
      Eigen::LLT<Eigen::MatrixXcd> llt(
          phi_n + (1e-9 * tr / m) * Eigen::MatrixXcd::Identity(m, m));
      if (llt.info() != Eigen::Success) {
        singular = true;
        continue;
      }
      l = llt.matrixL();
    }

    const auto lower = l.triangularView<Eigen::Lower>();
    Eigen::MatrixXcd s = lower.solve(observed.at_bin(k));
    s = lower.solve(s.adjoint().eval()).adjoint();
    s = 0.5 * (s + s.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(s);
    const auto& ev = eig.eigenvalues();
    if (ev(m - 2) > 0.0 && ev(m - 1) / ev(m - 2) < 1.1) ++degenerate;
    whiteners[k - lo] = l;
    noise_basis[k - lo] = eig.eigenvectors().leftCols(m - n_sources);
  }
  if (singular)
    throw SingularNoiseCovariance("noise covariance not factorable after loading");
  if (diag) {
    diag->degenerate_bins = degenerate;
    diag->bins_used = used;
  }
  if (degenerate > used / 2)
    log_warn("music eigengap below 1.1 in " + std::to_string(degenerate) +
             " of " + std::to_string(used) + " bins");

  AngularSpectrum spectrum;
  spectrum.grid = grid;
  spectrum.first_block = 0;
  spectrum.block_count = observed.frame_count;
  spectrum.scores.assign(grid->size(), 0.0);

  const long n = static_cast<long>(grid->size());
#pragma omp parallel for schedule(static)
  for (long d = 0; d < n; ++d) {
    const Eigen::Vector3d& u = grid->units[d];
    Eigen::VectorXd delays(m);
    for (int c = 0; c < m; ++c)
      delays(c) = u.dot(geom.mic_positions[0] - geom.mic_positions[c]) /
                  geom.speed_of_sound;

    Eigen::VectorXcd v(m);
    double score = 0.0;
    for (int k = lo; k <= hi; ++k) {
      const double f = k * observed.bin_hz;
      for (int c = 0; c < m; ++c) {
        const double phase = -2.0 * std::numbers::pi * f * delays(c);
        v(c) = std::complex<double>(std::cos(phase), std::sin(phase));
      }
      Eigen::VectorXcd w =
          whiteners[k - lo].triangularView<Eigen::Lower>().solve(v);
      w.normalize();
      const double p = (noise_basis[k - lo].adjoint() * w).squaredNorm();
      score += 1.0 / std::max(p, kEnergyFloor);
    }
    spectrum.scores[d] = score / used;
  }
  return spectrum;
}

namespace {

// Calls fn(index) for every grid point within radius_deg of the point at
// index center. Rows outside the elevation band cannot contain neighbors,
// so only nearby rows are scanned.
template <typename Fn>
void for_neighborhood(const DirectionGrid& grid, long center, double radius_deg,
                      Fn&& fn) {
  const int az_n = grid.azimuth_count();
  const double cos_radius =
      radius_deg >= 180.0 ? -2.0 : std::cos(radius_deg * std::numbers::pi / 180.0);
  const Eigen::Vector3d& u = grid.units[center];

  const double el = grid.directions[center].elevation_deg;
  const int row_lo = static_cast<int>(
      std::floor((el - radius_deg - grid.el_min_deg) / grid.el_step_deg));
  const int row_hi = static_cast<int>(
      std::ceil((el + radius_deg - grid.el_min_deg) / grid.el_step_deg));
  const int rows = grid.elevation_count();

  for (int r = std::max(0, row_lo); r <= std::min(rows - 1, row_hi); ++r) {
    const long base = static_cast<long>(r) * az_n;
    for (int c = 0; c < az_n; ++c) {
      const long idx = base + c;
      if (u.dot(grid.units[idx]) >= cos_radius - 1e-12) fn(idx);
    }
  }
}

void check_spectrum(const AngularSpectrum& spectrum) {
  if (!spectrum.grid || spectrum.scores.size() != spectrum.grid->size())
    throw ShapeMismatch("angular spectrum does not match its grid");
  if (spectrum.scores.empty()) throw EmptyInput("empty angular spectrum");
}

}  // namespace

AngularSpectrum max_filter(const AngularSpectrum& spectrum, double radius_deg) {
  check_spectrum(spectrum);
  if (radius_deg < 0.0) throw InvalidConfig("max filter radius must be >= 0");

  AngularSpectrum out = spectrum;
  const long n = static_cast<long>(spectrum.scores.size());
#pragma omp parallel for schedule(static)
  for (long d = 0; d < n; ++d) {
    double best = spectrum.scores[d];
    for_neighborhood(*spectrum.grid, d, radius_deg, [&](long idx) {
      best = std::max(best, spectrum.scores[idx]);
    });
    out.scores[d] = best;
  }
  return out;
}

AngularSpectrum mask_rotors(const AngularSpectrum& spectrum,
                            std::span<const Direction> rotor_dirs,
                            double radius_deg) {
  check_spectrum(spectrum);
  if (radius_deg < 0.0) throw InvalidConfig("mask radius must be >= 0");

  std::vector<Eigen::Vector3d> rotors;
  rotors.reserve(rotor_dirs.size());
  for (const auto& r : rotor_dirs) rotors.push_back(r.unit_vector());
  const double cos_radius =
      radius_deg >= 180.0 ? -2.0 : std::cos(radius_deg * std::numbers::pi / 180.0);

  AngularSpectrum out = spectrum;
  long masked = 0;
  const long n = static_cast<long>(spectrum.scores.size());
#pragma omp parallel for schedule(static) reduction(+ : masked)
  for (long d = 0; d < n; ++d) {
    for (const auto& r : rotors) {
      if (spectrum.grid->units[d].dot(r) >= cos_radius - 1e-12) {
        out.scores[d] = masked_score();
        ++masked;
        break;
      }
    }
  }
  if (masked == n) throw AllMasked("every grid point is within a rotor mask");
  return out;
}

LocalizationEstimate pick_peak(const AngularSpectrum& spectrum,
                               LocalizationMethod method) {
  check_spectrum(spectrum);
  long best = -1;
  double best_score = masked_score();
  for (long d = 0; d < static_cast<long>(spectrum.scores.size()); ++d) {
    if (spectrum.scores[d] == masked_score()) continue;
    if (best < 0 || spectrum.scores[d] > best_score) {
      best = d;
      best_score = spectrum.scores[d];
    }
  }
  if (best < 0) throw AllMasked("no unmasked grid point to pick");
  return {spectrum.grid->directions[best], best_score, method};
}

std::vector<LocalizationEstimate> top_peaks(const AngularSpectrum& spectrum,
                                            int count) {
  check_spectrum(spectrum);
  if (count < 1) throw InvalidConfig("peak count must be >= 1");
  const DirectionGrid& grid = *spectrum.grid;
  const double radius =
      1.5 * std::max(grid.az_step_deg, grid.el_step_deg);

  const long n = static_cast<long>(spectrum.scores.size());
  std::vector<char> is_max(n, 0);
#pragma omp parallel for schedule(static)
  for (long d = 0; d < n; ++d) {
    if (spectrum.scores[d] == masked_score()) continue;
    bool keep = true;
    for_neighborhood(grid, d, radius, [&](long idx) {
      if (spectrum.scores[idx] > spectrum.scores[d]) keep = false;
    });
    is_max[d] = keep ? 1 : 0;
  }
  std::vector<std::pair<double, long>> maxima;
  for (long d = 0; d < n; ++d)
    if (is_max[d]) maxima.emplace_back(spectrum.scores[d], d);
  std::sort(maxima.begin(), maxima.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });

  std::vector<LocalizationEstimate> out;
  for (std::size_t i = 0; i < maxima.size() && i < static_cast<std::size_t>(count); ++i)
    out.push_back({grid.directions[maxima[i].second], maxima[i].first,
                   LocalizationMethod::SrpPhat});
  return out;
}

Direction cluster_estimates(std::span<const AngularSpectrum> spectra, int k,
                            int top_m) {
  if (spectra.empty()) throw EmptyInput("no spectra to cluster");
  if (k < 1) throw InvalidConfig("cluster count must be >= 1");

  std::vector<Eigen::Vector3d> points;
  std::vector<double> confidence;
  for (const auto& s : spectra)
    for (const auto& peak : top_peaks(s, top_m)) {
      points.push_back(peak.direction.unit_vector());
      confidence.push_back(peak.confidence);
    }
  if (points.empty()) throw EmptyInput("no peaks found in any spectrum");

  const int np = static_cast<int>(points.size());
  const int clusters = std::min(k, np);

  // Seed with the highest-confidence peaks (stable under ties by insertion
  // order), then run spherical k-means.
  std::vector<int> order(np);
  for (int i = 0; i < np; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return confidence[a] > confidence[b];
  });
  std::vector<Eigen::Vector3d> centroid(clusters);
  for (int c = 0; c < clusters; ++c) centroid[c] = points[order[c]];

  std::vector<int> assign(np, 0);
  for (int iter = 0; iter < 50; ++iter) {
    for (int i = 0; i < np; ++i) {
      int best = 0;
      double best_dot = centroid[0].dot(points[i]);
      for (int c = 1; c < clusters; ++c) {
        const double dot = centroid[c].dot(points[i]);
        if (dot > best_dot) {
          best = c;
          best_dot = dot;
        }
      }
      assign[i] = best;
    }

    double moved = 0.0;
    for (int c = 0; c < clusters; ++c) {
      Eigen::Vector3d sum = Eigen::Vector3d::Zero();
      int count = 0;
      int strongest = -1;
      for (int i = 0; i < np; ++i) {
        if (assign[i] != c) continue;
        sum += points[i];
        ++count;
        if (strongest < 0 || confidence[i] > confidence[strongest]) strongest = i;
      }
      if (count == 0) continue;
      Eigen::Vector3d next;
      if (sum.norm() < 1e-9)
        next = points[strongest];  // antipodal collapse
      else
        next = sum.normalized();
      moved = std::max(moved, (next - centroid[c]).norm());
      centroid[c] = next;
    }
    if (moved < 1e-6) break;
  }

  int best_cluster = 0, best_count = -1;
  for (int c = 0; c < clusters; ++c) {
    const int count = static_cast<int>(std::count(assign.begin(), assign.end(), c));
    if (count > best_count) {
      best_cluster = c;
      best_count = count;
    }
  }
  return Direction::from_unit_vector(centroid[best_cluster]);
}

}  // namespace uavloc
