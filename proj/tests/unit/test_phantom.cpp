#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "octbd/error.hpp"
#include "octbd/phantom.hpp"
#include "octbd/pipeline.hpp"

using namespace octbd;

namespace {

constexpr std::size_t kSamples = 256;

OpticsConfig quiet_optics() {
  OpticsConfig optics = OpticsConfig::for_samples(kSamples);
  optics.noise_sigma = 0.0;
  return optics;
}

std::size_t peak_row(const RealMatrix& m, std::size_t col, std::size_t skip = 4) {
  std::size_t best = skip;
  for (std::size_t r = skip; r < m.rows(); ++r) {
    if (m(r, col) > m(best, col)) best = r;
  }
  return best;
}

}  // namespace

TEST_SUITE("phantom") {
  TEST_CASE("layered phantom is deterministic and ordered") {
    PhantomConfig cfg;
    cfg.num_alines = 64;
    cfg.samples_per_aline = kSamples;
    cfg.num_layers = 5;
    cfg.layer_depth_min = 20;
    cfg.layer_depth_max = 110;
    cfg.speckle_density = 10;
    cfg.seed = 7;
    const Phantom a = make_phantom(cfg);
    CHECK(a == make_phantom(cfg));
    cfg.seed = 8;
    CHECK_FALSE(a == make_phantom(cfg));

    REQUIRE(a.layer_depths.size() == 5);
    REQUIRE(a.num_alines() == 64);
    for (const auto& layer : a.layer_depths) {
      for (std::size_t j = 0; j < layer.size(); ++j) {
        CHECK(layer[j] >= 20.0);
        CHECK(layer[j] <= 110.0);
        if (j > 0) CHECK(std::abs(layer[j] - layer[j - 1]) <= 2.0);
      }
    }
    for (std::size_t j = 0; j < 64; ++j) {
      for (std::size_t i = 1; i < 5; ++i) CHECK(a.layer_depths[i - 1][j] <= a.layer_depths[i][j]);
    }
  }

  TEST_CASE("no layers and no speckle gives empty A-lines") {
    PhantomConfig cfg;
    cfg.num_alines = 4;
    cfg.samples_per_aline = kSamples;
    cfg.num_layers = 0;
    cfg.speckle_density = 0;
    const Phantom p = make_phantom(cfg);
    for (const auto& aline : p.alines) CHECK(aline.empty());
  }

  TEST_CASE("invalid phantom and optics configurations") {
    PhantomConfig cfg;
    cfg.samples_per_aline = 1000;
    CHECK_THROWS_AS(make_phantom(cfg), ConfigError);
    cfg = {};
    cfg.num_alines = 0;
    CHECK_THROWS_AS(make_phantom(cfg), ConfigError);
    cfg = {};
    cfg.layer_depth_max = 600;
    CHECK_THROWS_AS(make_phantom(cfg), ConfigError);
    cfg = {};
    cfg.reflectivity_max = 1.5;
    CHECK_THROWS_AS(make_phantom(cfg), ConfigError);

    const Phantom p = single_reflector_phantom(2, kSamples, 30, 0.5);
    OpticsConfig optics = quiet_optics();
    optics.dc_level = 0.98;
    CHECK_THROWS_AS(synthesize_fringe(p, optics, 1), ConfigError);
    optics = quiet_optics();
    optics.k_mapping = KMapping({0.0, 1.0, -2.0});
    CHECK_THROWS_AS(synthesize_fringe(p, optics, 1), ConfigError);
    CHECK_THROWS_AS(synthesize_fringe(single_reflector_phantom(2, kSamples, 200, 0.5), quiet_optics(), 1),
                    ConfigError);
  }

  TEST_CASE("empty sample without noise is the rounded reference spectrum") {
    Phantom p = single_reflector_phantom(3, kSamples, 10, 0.0);
    for (auto& aline : p.alines) aline.clear();
    const OpticsConfig optics = quiet_optics();
    const SpectralFrame f = synthesize_fringe(p, optics, 99);
    const auto ref = reference_spectrum(optics, kSamples);
    CHECK(f.bit_depth == 12);
    CHECK(f.k_grid_tag == optics.k_mapping.tag());
    for (std::size_t j = 0; j < 3; ++j) {
      for (std::size_t s = 0; s < kSamples; ++s) CHECK(f.samples(s, j) == std::round(ref[s]));
    }
  }

  TEST_CASE("samples are clipped to the ADC range") {
    OpticsConfig optics = quiet_optics();
    optics.dc_level = 0.8;
    optics.fringe_visibility = 0.2;
    optics.noise_sigma = 400.0;
    const SpectralFrame f = synthesize_fringe(single_reflector_phantom(8, kSamples, 30, 1.0), optics, 3);
    const auto [lo, hi] = std::minmax_element(f.samples.values().begin(), f.samples.values().end());
    CHECK(*lo == 0);
    CHECK(*hi == 4095);
  }

  TEST_CASE("noise is deterministic in the seed") {
    OpticsConfig optics = OpticsConfig::for_samples(kSamples);
    const Phantom p = single_reflector_phantom(4, kSamples, 30, 0.5);
    CHECK(synthesize_fringe(p, optics, 5) == synthesize_fringe(p, optics, 5));
    CHECK_FALSE(synthesize_fringe(p, optics, 5) == synthesize_fringe(p, optics, 6));
  }

  TEST_CASE("a single reflector lands in its depth bin") {
    const OpticsConfig optics = quiet_optics();
    const PipelineConfig pipe = PipelineConfig::matched(optics, kSamples);
    const RealMatrix mag = depth_magnitude(synthesize_fringe(single_reflector_phantom(2, kSamples, 40, 0.8), optics, 1), pipe);
    REQUIRE(mag.rows() == kSamples / 2);
    CHECK(peak_row(mag, 0) == 40);
    CHECK(peak_row(mag, 1) == 40);
  }

  TEST_CASE("full-length A-scan with linear wavenumber sampling") {
    OpticsConfig optics;
    optics.k_mapping = KMapping::identity();
    optics.dispersion_a2 = optics.dispersion_a3 = 0.0;
    optics.noise_sigma = 0.0;
    const PipelineConfig pipe = PipelineConfig::matched(optics, 1024);
    const auto frame = synthesize_fringe(single_reflector_phantom(1, 1024, 100, 0.5), optics, 1);
    CHECK(peak_row(depth_magnitude(frame, pipe), 0) == 100);
  }

  TEST_CASE("localization holds for random depths with noise") {
    const OpticsConfig optics = OpticsConfig::for_samples(kSamples);
    const PipelineConfig pipe = PipelineConfig::matched(optics, kSamples);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> depth(12.0, 115.0);
    for (int trial = 0; trial < 20; ++trial) {
      const double z = depth(rng);
      const auto frame = synthesize_fringe(single_reflector_phantom(1, kSamples, z, 0.7), optics, trial);
      const auto peak = static_cast<double>(peak_row(depth_magnitude(frame, pipe), 0));
      CAPTURE(z);
      CHECK(std::abs(peak - z) <= 1.0);
    }
  }

  TEST_CASE("peak amplitude is linear in reflectivity") {
    const OpticsConfig optics = quiet_optics();
    const PipelineConfig pipe = PipelineConfig::matched(optics, kSamples);
    auto peak = [&](double r) {
      const auto mag = depth_magnitude(synthesize_fringe(single_reflector_phantom(1, kSamples, 50, r), optics, 1), pipe);
      return mag(peak_row(mag, 0), 0);
    };
    const double one = peak(0.3);
    const double two = peak(0.6);
    CHECK(two / one == doctest::Approx(2.0).epsilon(0.01));
  }

  TEST_CASE("derived seeds differ per stream") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(42, 3) == derive_seed(42, 3));
  }
}
