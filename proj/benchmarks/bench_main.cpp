#include <benchmark/benchmark.h>

#include <random>

#include "octbd/metrics.hpp"
#include "octbd/phantom.hpp"
#include "octbd/pipeline.hpp"
#include "octbd/quantize.hpp"

using namespace octbd;

namespace {

PhantomConfig phantom_for(std::size_t samples) {
  PhantomConfig pc;
  pc.samples_per_aline = samples;
  pc.num_alines = 64;
  pc.layer_depth_min = 0.07 * static_cast<double>(samples);
  pc.layer_depth_max = 0.32 * static_cast<double>(samples);
  return pc;
}

RealMatrix noise_image(std::uint64_t seed, std::size_t side) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealMatrix m(side, side);
  for (auto& v : m.values()) v = u(rng);
  return m;
}

}  // namespace

static void SynthesizeFringe(benchmark::State& state) {
  const auto samples = static_cast<std::size_t>(state.range(0));
  const Phantom phantom = make_phantom(phantom_for(samples));
  const OpticsConfig optics = OpticsConfig::for_samples(samples);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize_fringe(phantom, optics, 1));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(SynthesizeFringe)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

static void Requantize(benchmark::State& state) {
  const SpectralFrame frame = synthesize_fringe(make_phantom(phantom_for(1024)), OpticsConfig::for_samples(1024), 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(requantize(frame, static_cast<int>(state.range(0))));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(frame.samples.size() * 2));
}
BENCHMARK(Requantize)->Arg(3)->Arg(8);

static void ProcessFrame(benchmark::State& state) {
  const auto samples = static_cast<std::size_t>(state.range(0));
  const OpticsConfig optics = OpticsConfig::for_samples(samples);
  const SpectralFrame frame = synthesize_fringe(make_phantom(phantom_for(samples)), optics, 1);
  PipelineConfig cfg = PipelineConfig::matched(optics, samples);
  cfg.interpolation = state.range(1) ? Interpolation::Cubic : Interpolation::Linear;
  for (auto _ : state) {
    benchmark::DoNotOptimize(process_frame(frame, cfg));
  }
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(ProcessFrame)->Args({512, 0})->Args({1024, 0})->Args({1024, 1})->Unit(benchmark::kMillisecond);

static void Metrics(benchmark::State& state) {
  const auto side = static_cast<std::size_t>(state.range(0));
  const RealMatrix x = noise_image(1, side);
  RealMatrix y = noise_image(2, side);
  for (std::size_t i = 0; i < y.size(); ++i) y.values()[i] = 0.5 * (x.values()[i] + y.values()[i]);
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_pair("b", 3, Source::Original, x, y));
  }
}
BENCHMARK(Metrics)->Arg(64)->Arg(256);

static void MsssimMultiScale(benchmark::State& state) {
  const RealMatrix x = noise_image(3, 256);
  const RealMatrix y = noise_image(4, 256);
  MetricsConfig cfg;
  cfg.scales = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(msssim(x, y, cfg));
  }
}
BENCHMARK(MsssimMultiScale)->Arg(1)->Arg(5);

BENCHMARK_MAIN();
