#include "octbd/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "octbd/error.hpp"
#include "octbd/parallel.hpp"
#include "random.hpp"

namespace octbd {
namespace {

constexpr double kFullScale = 4095.0;
constexpr double kMaxLateralStep = 2.0;  // pixels between adjacent A-lines

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

struct Undulation {
  double amplitude = 0.0;
  double cycles = 0.0;  // periods across the frame
  double phase = 0.0;

  double at(std::size_t j, std::size_t n) const {
    return amplitude *
           std::sin(2.0 * std::numbers::pi * cycles * static_cast<double>(j) / static_cast<double>(n) + phase);
  }
  double max_step(std::size_t n) const {
    return amplitude * 2.0 * std::numbers::pi * cycles / static_cast<double>(n);
  }
};

Undulation random_undulation(std::mt19937_64& rng, double amplitude, double min_cycles,
                             double max_cycles) {
  return {amplitude * detail::uniform(rng, 0.5, 1.0), detail::uniform(rng, min_cycles, max_cycles),
          detail::uniform(rng, 0.0, 2.0 * std::numbers::pi)};
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

void PhantomConfig::validate() const {
  if (num_alines < 1) throw ConfigError("num_alines must be at least 1");
  if (!is_power_of_two(samples_per_aline) || samples_per_aline < 64) {
    throw ConfigError("samples_per_aline must be a power of two >= 64, got " +
                      std::to_string(samples_per_aline));
  }
  if (!(reflectivity_min >= 0.0 && reflectivity_min <= reflectivity_max && reflectivity_max <= 1.0)) {
    throw ConfigError("reflectivity range must satisfy 0 <= min <= max <= 1");
  }
  if (!(speckle_reflectivity >= 0.0 && speckle_reflectivity <= 1.0)) {
    throw ConfigError("speckle_reflectivity must lie in [0, 1]");
  }
  if (!(speckle_density >= 0.0)) throw ConfigError("speckle_density must be non-negative");
  if (!(lateral_undulation >= 0.0)) throw ConfigError("lateral_undulation must be non-negative");
  if (num_layers > 0 || speckle_density > 0.0) {
    const double limit = static_cast<double>(samples_per_aline) / 2.0;
    if (!(layer_depth_min >= 0.0 && layer_depth_min < layer_depth_max && layer_depth_max < limit)) {
      throw ConfigError("layer depth range [" + std::to_string(layer_depth_min) + ", " +
                        std::to_string(layer_depth_max) + "] must lie inside [0, " +
                        std::to_string(limit) + ")");
    }
  }
}

OpticsConfig OpticsConfig::for_samples(std::size_t samples_per_aline) {
  OpticsConfig optics;
  const double scale = static_cast<double>(samples_per_aline) / 1024.0;
  optics.envelope_center *= scale;
  optics.envelope_fwhm *= scale;
  return optics;
}

void OpticsConfig::validate(std::size_t samples_per_aline) const {
  if (!(envelope_fwhm > 0.0) || !std::isfinite(envelope_center)) {
    throw ConfigError("source envelope needs a finite center and positive FWHM");
  }
  if (!(dc_level >= 0.0 && fringe_visibility >= 0.0 && dc_level + fringe_visibility <= 1.0)) {
    throw ConfigError("dc_level and fringe_visibility must be non-negative with sum <= 1");
  }
  if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma must be non-negative");
  if (!std::isfinite(dispersion_a2) || !std::isfinite(dispersion_a3)) {
    throw ConfigError("dispersion coefficients must be finite");
  }
  if (!k_mapping.is_strictly_monotone(samples_per_aline)) {
    throw ConfigError("k-mapping " + k_mapping.tag() + " is not strictly monotone");
  }
}

Phantom make_phantom(const PhantomConfig& config) {
  config.validate();
  const std::size_t n_alines = config.num_alines;
  std::mt19937_64 rng(config.seed);

  Phantom phantom;
  phantom.samples_per_aline = config.samples_per_aline;
  phantom.alines.assign(n_alines, {});

  const double lo = config.layer_depth_min;
  const double hi = config.layer_depth_max;
  const double margin = std::min(config.lateral_undulation, (hi - lo) / 4.0);

  // Shared curvature plus a small per-layer ripple keeps layers ordered.
  Undulation broad = random_undulation(rng, 0.6 * margin, 0.3, 1.2);
  Undulation fine = random_undulation(rng, 0.25 * margin, 1.5, 3.0);
  std::vector<Undulation> ripples(config.num_layers);
  for (auto& r : ripples) r = random_undulation(rng, 0.15 * margin, 0.5, 2.0);

  double ripple_step = 0.0;
  for (const auto& r : ripples) ripple_step = std::max(ripple_step, r.max_step(n_alines));
  const double worst_step = broad.max_step(n_alines) + fine.max_step(n_alines) + ripple_step;
  if (worst_step > kMaxLateralStep) {
    const double shrink = kMaxLateralStep / worst_step;
    broad.amplitude *= shrink;
    fine.amplitude *= shrink;
    for (auto& r : ripples) r.amplitude *= shrink;
  }

  std::vector<double> means(config.num_layers);
  std::vector<double> reflectivity(config.num_layers);
  const double usable = (hi - lo) - 2.0 * margin;
  for (std::size_t i = 0; i < config.num_layers; ++i) {
    const double spacing = usable / static_cast<double>(config.num_layers);
    means[i] = lo + margin + spacing * (static_cast<double>(i) + 0.5 + detail::uniform(rng, -0.3, 0.3));
    reflectivity[i] = detail::uniform(rng, config.reflectivity_min, config.reflectivity_max);
  }
  std::sort(means.begin(), means.end());

  phantom.layer_depths.assign(config.num_layers, std::vector<double>(n_alines));
  for (std::size_t i = 0; i < config.num_layers; ++i) {
    for (std::size_t j = 0; j < n_alines; ++j) {
      const double z = means[i] + broad.at(j, n_alines) + fine.at(j, n_alines) + ripples[i].at(j, n_alines);
      phantom.layer_depths[i][j] = std::clamp(z, lo, hi);
    }
  }

  // Each band between consecutive layers scatters with its own brightness.
  const std::size_t bands = config.num_layers >= 2 ? config.num_layers - 1 : 1;
  std::vector<double> band_weight(bands);
  for (auto& w : band_weight) w = detail::uniform(rng, 0.25, 1.0);

  for (std::size_t j = 0; j < n_alines; ++j) {
    auto& reflectors = phantom.alines[j];
    for (std::size_t i = 0; i < config.num_layers; ++i) {
      reflectors.push_back({phantom.layer_depths[i][j], reflectivity[i]});
    }
    if (config.speckle_density <= 0.0) continue;

    std::mt19937_64 local(derive_seed(config.seed, j));
    double whole = 0.0;
    const double frac = std::modf(config.speckle_density, &whole);
    const auto count = static_cast<std::size_t>(whole) + (detail::uniform01(local) < frac ? 1 : 0);
    const double top = config.num_layers >= 2 ? phantom.layer_depths.front()[j] : lo;
    const double bottom = config.num_layers >= 2 ? phantom.layer_depths.back()[j] : hi;
    for (std::size_t k = 0; k < count; ++k) {
      const double z = detail::uniform(local, top, bottom);
      std::size_t band = 0;
      if (config.num_layers >= 2) {
        while (band + 1 < bands && z > phantom.layer_depths[band + 1][j]) ++band;
      }
      const double r = config.speckle_reflectivity * band_weight[band] * detail::uniform01(local);
      reflectors.push_back({z, r});
    }
  }
  return phantom;
}

Phantom single_reflector_phantom(std::size_t num_alines, std::size_t samples_per_aline, double depth,
                                 double reflectivity) {
  Phantom phantom;
  phantom.samples_per_aline = samples_per_aline;
  phantom.alines.assign(num_alines, {Reflector{depth, reflectivity}});
  phantom.layer_depths.assign(1, std::vector<double>(num_alines, depth));
  return phantom;
}

std::vector<double> reference_spectrum(const OpticsConfig& optics, std::size_t samples_per_aline) {
  std::vector<double> ref(samples_per_aline);
  const double c = 4.0 * std::numbers::ln2 / (optics.envelope_fwhm * optics.envelope_fwhm);
  for (std::size_t s = 0; s < samples_per_aline; ++s) {
    const double d = static_cast<double>(s) - optics.envelope_center;
    ref[s] = kFullScale * optics.dc_level * std::exp(-c * d * d);
  }
  return ref;
}

SpectralFrame synthesize_fringe(const Phantom& phantom, const OpticsConfig& optics,
                                std::uint64_t noise_seed) {
  const std::size_t n = phantom.samples_per_aline;
  optics.validate(n);
  const double limit = static_cast<double>(n) / 2.0;
  for (const auto& aline : phantom.alines) {
    for (const auto& r : aline) {
      if (!(r.depth >= 0.0 && r.depth < limit)) {
        throw ConfigError("reflector depth " + std::to_string(r.depth) +
                          " outside the unambiguous range");
      }
    }
  }

  std::vector<double> envelope(n), twice_k(n), phase(n);
  const double c = 4.0 * std::numbers::ln2 / (optics.envelope_fwhm * optics.envelope_fwhm);
  for (std::size_t s = 0; s < n; ++s) {
    const double kappa = optics.k_mapping(static_cast<double>(s), n);
    const double d = static_cast<double>(s) - optics.envelope_center;
    envelope[s] = kFullScale * std::exp(-c * d * d);
    twice_k[s] = 2.0 * std::numbers::pi * kappa / static_cast<double>(n);
    phase[s] = dispersion_phase(kappa, n, optics.dispersion_a2, optics.dispersion_a3);
  }

  SpectralFrame frame;
  frame.bit_depth = kNativeBitDepth;
  frame.k_grid_tag = optics.k_mapping.tag();
  frame.samples = Matrix<std::uint16_t>(n, phantom.num_alines());

  parallel_for(phantom.num_alines(), [&](std::size_t j) {
    const auto& reflectors = phantom.alines[j];
    std::mt19937_64 rng(derive_seed(noise_seed, j));
    auto column = frame.samples.column(j);
    for (std::size_t s = 0; s < n; ++s) {
      double fringe = 0.0;
      for (const auto& r : reflectors) fringe += r.reflectivity * std::cos(twice_k[s] * r.depth + phase[s]);
      double value = envelope[s] * (optics.dc_level + optics.fringe_visibility * fringe);
      if (optics.noise_sigma > 0.0) value += optics.noise_sigma * detail::normal(rng);
      column[s] = static_cast<std::uint16_t>(std::clamp(std::round(value), 0.0, kFullScale));
    }
  });
  return frame;
}

}  // namespace octbd
