#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "octbd/frame.hpp"
#include "octbd/kgrid.hpp"

namespace octbd {

/// Layered retina-like phantom. Depths are in depth-pixel units of the
/// processed A-scan, so the unambiguous range is [0, samples_per_aline / 2).
struct PhantomConfig {
  std::size_t num_alines = 200;
  std::size_t samples_per_aline = 1024;
  std::size_t num_layers = 6;
  double layer_depth_min = 70.0;
  double layer_depth_max = 330.0;
  double reflectivity_min = 0.2;
  double reflectivity_max = 0.9;
  /// Scatterers per A-line, spread between the top and bottom layer.
  double speckle_density = 80.0;
  /// Upper bound on a single scatterer's reflectivity.
  double speckle_reflectivity = 0.12;
  /// Largest excursion of a layer trace from its mean depth, pixels.
  double lateral_undulation = 12.0;
  std::uint64_t seed = 1;

  /// Throws ConfigError when an invariant does not hold.
  void validate() const;
};

struct Reflector {
  double depth = 0.0;
  double reflectivity = 0.0;

  bool operator==(const Reflector&) const = default;
};

struct Phantom {
  std::size_t samples_per_aline = 0;
  /// Reflectors of A-line j (layers first, then scatterers).
  std::vector<std::vector<Reflector>> alines;
  /// layer_depths[i][j]: depth of layer i at A-line j.
  std::vector<std::vector<double>> layer_depths;

  std::size_t num_alines() const noexcept { return alines.size(); }

  bool operator==(const Phantom&) const = default;
};

/// Source, interferometer and detector model of the simulated spectrometer.
struct OpticsConfig {
  /// Gaussian source envelope over sample index.
  double envelope_center = 512.0;
  double envelope_fwhm = 560.0;
  /// Reference-arm (DC) level as a fraction of ADC full scale.
  double dc_level = 0.45;
  double fringe_visibility = 0.05;
  /// Additive Gaussian noise, ADC counts.
  double noise_sigma = 1.5;
  KMapping k_mapping = KMapping::quadratic(0.08);
  /// Phase a2*xi^2 + a3*xi^3 added to every fringe, radians at the band edge.
  double dispersion_a2 = 12.0;
  double dispersion_a3 = 4.0;

  /// Default optics scaled to a given spectrum length.
  static OpticsConfig for_samples(std::size_t samples_per_aline);

  void validate(std::size_t samples_per_aline) const;
};

/// Builds a laterally smooth layered phantom. Deterministic in config.seed.
Phantom make_phantom(const PhantomConfig& config);

/// Phantom whose every A-line holds one reflector at the same depth.
Phantom single_reflector_phantom(std::size_t num_alines, std::size_t samples_per_aline,
                                 double depth, double reflectivity);

/// Renders the phantom as 12-bit spectral interferograms:
///   I(s) = round(S(s) * [dc + v * sum_i r_i cos(2 k(s) z_i + phi(k(s)))] + n(s))
/// clipped to [0, 4095], with k(s) = pi * kappa(s) / n.
SpectralFrame synthesize_fringe(const Phantom& phantom, const OpticsConfig& optics,
                                std::uint64_t noise_seed);

/// Noise-free reference-arm spectrum S(s) * dc in 12-bit counts, unrounded.
std::vector<double> reference_spectrum(const OpticsConfig& optics, std::size_t samples_per_aline);

/// Stateless 64-bit mixer used to derive per-item seeds from a master seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace octbd
