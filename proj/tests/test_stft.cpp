#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "support/oracles.hpp"
#include "uavloc/covariance.hpp"
#include "uavloc/errors.hpp"
#include "uavloc/rng.hpp"
#include "uavloc/stft.hpp"

using namespace uavloc;

namespace {

MultichannelRecording noise_recording(int channels, std::size_t len,
                                      double rate, std::uint64_t seed) {
  auto rec = MultichannelRecording::zeros(channels, len, rate);
  Rng rng(seed);
  for (auto& ch : rec.samples)
    for (auto& s : ch) s = rng.normal();
  return rec;
}

double rms(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / x.size());
}

}  // namespace

TEST_CASE("stft of all-zero signal is exactly zero") {
  auto rec = MultichannelRecording::zeros(1, 4096, 44100.0);
  auto blocks = stft(rec, {1024, 512, WindowKind::Hann});
  for (const auto& b : blocks)
    for (const auto& ch : b.bins)
      for (const auto& v : ch) CHECK(std::abs(v) == 0.0);
}

TEST_CASE("stft block count follows floor((len-fft)/hop)+1") {
  auto rec = MultichannelRecording::zeros(1, 4096, 44100.0);
  CHECK(stft(rec, {1024, 512, WindowKind::Hann}).size() == 7);
  CHECK(stft_block_count(4096, {1024, 512, WindowKind::Hann}) == 7);
  CHECK(stft_block_count(1024, {1024, 512, WindowKind::Hann}) == 1);
  CHECK(stft_block_count(1023, {1024, 512, WindowKind::Hann}) == 0);
}

TEST_CASE("stft of a bin-centered sinusoid peaks at that bin") {
  const int fft = 256;
  const double rate = 44100.0;
  const int k = 19;
  const double freq = k * rate / fft;
  auto rec = MultichannelRecording::zeros(1, 1024, rate);
  for (std::size_t n = 0; n < rec.length(); ++n)
    rec.samples[0][n] = std::sin(2.0 * std::numbers::pi * freq * n / rate);

  auto blocks = stft(rec, {fft, 128, WindowKind::Rectangular});
  REQUIRE(!blocks.empty());
  for (const auto& b : blocks) {
    int argmax = 0;
    for (int i = 1; i < b.bin_count(); ++i)
      if (std::abs(b.bins[0][i]) > std::abs(b.bins[0][argmax])) argmax = i;
    CHECK(argmax == k);
  }

  // Cross-check one block against the O(N^2) DFT.
  auto frame = frame_at(rec, 0, fft);
  auto expected = oracle::naive_dft(frame.samples[0]);
  for (int i = 0; i < blocks[0].bin_count(); ++i)
    CHECK(std::abs(blocks[0].bins[0][i] - expected[i]) < 1e-8);
}

TEST_CASE("stft rejects bad configs and short input") {
  auto rec = MultichannelRecording::zeros(1, 512, 44100.0);
  CHECK_THROWS_AS(stft(rec, {1024, 512, WindowKind::Hann}), RecordingTooShort);
  CHECK_THROWS_AS(stft(rec, {256, 0, WindowKind::Hann}), InvalidConfig);
  CHECK_THROWS_AS(stft(rec, {256, -4, WindowKind::Hann}), InvalidConfig);
  CHECK_THROWS_AS(stft(rec, {300, 128, WindowKind::Hann}), InvalidConfig);
}

TEST_CASE("stft is linear") {
  const StftConfig cfg{128, 64, WindowKind::Hann};
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    auto x = noise_recording(1, 512, 8000.0, 100 + trial);
    auto y = noise_recording(1, 512, 8000.0, 5000 + trial);
    const double a = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(-2.0, 2.0);
    auto z = MultichannelRecording::zeros(1, 512, 8000.0);
    for (std::size_t n = 0; n < z.length(); ++n)
      z.samples[0][n] = a * x.samples[0][n] + b * y.samples[0][n];

    auto bx = stft(x, cfg);
    auto by = stft(y, cfg);
    auto bz = stft(z, cfg);
    double max_err = 0.0, max_mag = 0.0;
    for (std::size_t t = 0; t < bz.size(); ++t)
      for (int i = 0; i < bz[t].bin_count(); ++i) {
        const auto lin = a * bx[t].bins[0][i] + b * by[t].bins[0][i];
        max_err = std::max(max_err, std::abs(bz[t].bins[0][i] - lin));
        max_mag = std::max(max_mag, std::abs(lin));
      }
    CHECK(max_err <= 1e-9 * std::max(max_mag, 1.0));
  }
}

TEST_CASE("Parseval holds for the rectangular window") {
  auto rec = noise_recording(1, 1024, 44100.0, 11);
  const int fft = 1024;
  auto blocks = stft(rec, {fft, fft, WindowKind::Rectangular});
  REQUIRE(blocks.size() == 1);
  double time_energy = 0.0;
  for (double v : rec.samples[0]) time_energy += v * v;
  double spec_energy = 0.0;
  for (int k = 0; k < blocks[0].bin_count(); ++k) {
    const double m = std::norm(blocks[0].bins[0][k]);
    const bool shared = (k == 0 || k == fft / 2);
    spec_energy += (shared ? 1.0 : 2.0) * m;
  }
  spec_energy /= fft;
  CHECK(std::abs(spec_energy - time_energy) < 1e-6 * time_energy);
}

TEST_CASE("istft round trip reconstructs the interior") {
  const StftConfig cfg{1024, 512, WindowKind::Hann};

  SUBCASE("white noise") {
    auto rec = noise_recording(2, 8192, 44100.0, 3);
    auto back = istft(stft(rec, cfg), cfg);
    for (int c = 0; c < 2; ++c) {
      double err = 0.0, ref = 0.0;
      for (std::size_t n = cfg.fft_size; n + cfg.fft_size < rec.length(); ++n) {
        const double d = back.samples[c][n] - rec.samples[c][n];
        err += d * d;
        ref += rec.samples[c][n] * rec.samples[c][n];
      }
      CHECK(std::sqrt(err / ref) < 1e-6);
    }
  }

  SUBCASE("sinusoid") {
    auto rec = MultichannelRecording::zeros(1, 8192, 44100.0);
    for (std::size_t n = 0; n < rec.length(); ++n)
      rec.samples[0][n] = std::sin(2.0 * std::numbers::pi * 997.0 * n / 44100.0);
    auto back = istft(stft(rec, cfg), cfg);
    double err = 0.0, ref = 0.0;
    for (std::size_t n = cfg.fft_size; n + cfg.fft_size < rec.length(); ++n) {
      const double d = back.samples[0][n] - rec.samples[0][n];
      err += d * d;
      ref += rec.samples[0][n] * rec.samples[0][n];
    }
    CHECK(std::sqrt(err / ref) < 1e-6);
  }

  SUBCASE("all-zero blocks give an all-zero signal") {
    auto rec = MultichannelRecording::zeros(1, 4096, 44100.0);
    auto back = istft(stft(rec, cfg), cfg);
    CHECK(rms(back.samples[0]) == 0.0);
  }
}

TEST_CASE("istft rejects inconsistent blocks") {
  const StftConfig cfg{256, 128, WindowKind::Hann};
  auto blocks = stft(noise_recording(2, 1024, 8000.0, 5), cfg);
  auto broken = blocks;
  broken[1].bins.pop_back();
  CHECK_THROWS_AS(istft(broken, cfg), InconsistentBlocks);
  CHECK_THROWS_AS(istft(std::vector<SpectralBlock>{}, cfg), InconsistentBlocks);
}

TEST_CASE("covariance of simple constructed blocks") {
  SUBCASE("single block, |x|^2 on the diagonal") {
    SpectralBlock b;
    b.bin_hz = 1.0;
    b.bins = {{{2.0, 0.0}, {0.0, 0.0}}};
    auto cov = accumulate_covariance(std::vector<SpectralBlock>{b}, {0, 2});
    CHECK(cov.mats[0](0, 0).real() == doctest::Approx(4.0));
    CHECK(cov.mats[0](0, 0).imag() == 0.0);
    CHECK(cov.frame_count == 1);
  }

  SUBCASE("two blocks with values 1 and i have unit variance") {
    SpectralBlock b1, b2;
    b1.bin_hz = b2.bin_hz = 1.0;
    b1.bins = {{{1.0, 0.0}}};
    b2.bins = {{{0.0, 1.0}}};
    auto cov =
        accumulate_covariance(std::vector<SpectralBlock>{b1, b2}, {0, 1});
    CHECK(cov.mats[0](0, 0).real() == doctest::Approx(1.0));
  }

  SUBCASE("empty input throws") {
    CHECK_THROWS_AS(
        accumulate_covariance(std::vector<SpectralBlock>{}, {0, 1}),
        EmptyInput);
  }
}

TEST_CASE("covariance matches the double-loop oracle on random blocks") {
  auto rec = noise_recording(8, 2048, 44100.0, 17);
  auto blocks = stft(rec, {256, 128, WindowKind::Hann});
  auto cov = accumulate_covariance(blocks, {0, 129});
  for (int bin : {0, 1, 31, 64, 128}) {
    auto expect = oracle::naive_covariance(blocks, bin);
    const double err = (cov.at_bin(bin) - expect).cwiseAbs().maxCoeff();
    CHECK(err < 1e-12 * std::max(1.0, expect.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("covariance is Hermitian positive semi-definite") {
  for (int trial = 0; trial < 200; ++trial) {
    auto rec = noise_recording(4, 512, 8000.0, 900 + trial);
    auto blocks = stft(rec, {128, 64, WindowKind::Hann});
    auto cov = accumulate_covariance(blocks, {0, 65});
    for (const auto& m : cov.mats) {
      CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() <=
            1e-9 * std::max(1.0, m.cwiseAbs().maxCoeff()));
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(m);
      const double largest = eig.eigenvalues().maxCoeff();
      CHECK(eig.eigenvalues().minCoeff() >= -1e-9 * std::max(largest, 1e-30));
    }
  }
}
