#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "uavloc/angular_spectrum.hpp"
#include "uavloc/covariance.hpp"
#include "uavloc/enhance.hpp"
#include "uavloc/geometry.hpp"
#include "uavloc/reference.hpp"
#include "uavloc/rng.hpp"
#include "uavloc/scene_sim.hpp"
#include "uavloc/stft.hpp"

using namespace uavloc;

namespace {

struct Fixture {
  std::vector<SpectralBlock> blocks;
  std::shared_ptr<const DirectionGrid> grid = build_grid(5.0, 5.0);
  ArrayGeometry geom = ArrayGeometry::cube();
  PairMask mask{8};
  NoiseModel noise;
  SpatialCovariance observed;

  Fixture() {
    SceneSpec spec;
    spec.path = DirectionPath::fixed({40.0, 10.0});
    spec.kind = SourceKind::SpeechLike;
    spec.duration_s = 1.0;
    spec.seed = 5;
    MultichannelRecording rec = render_source(spec);
    Rng rng(11);
    for (auto& ch : rec.samples)
      for (auto& s : ch) s += 0.05 * rng.normal();
    blocks = stft(rec, StftConfig{});
    noise = estimate_noise_vad(blocks);
    observed = accumulate_covariance(
        blocks, bins_for_band(100.0, 8000.0, blocks[0].bin_hz,
                              static_cast<int>(blocks[0].bin_count())));
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void bm_srp_parallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(srp(f.blocks, f.grid, f.geom, f.mask, {}));
}

void bm_srp_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        reference::srp_serial(f.blocks, f.grid, f.geom, f.mask, {}));
}

void bm_music_parallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        gevd_music(f.observed, f.noise, f.grid, f.geom, 1));
}

void bm_music_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(
        reference::gevd_music_serial(f.observed, f.noise, f.grid, f.geom, 1));
}

void bm_mwf_parallel(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(mwf(f.blocks, f.noise));
}

void bm_mwf_serial(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::mwf_serial(f.blocks, f.noise));
}

BENCHMARK(bm_srp_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_srp_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_music_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_music_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_mwf_parallel)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_mwf_serial)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
