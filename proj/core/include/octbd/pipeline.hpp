#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "octbd/frame.hpp"
#include "octbd/kgrid.hpp"
#include "octbd/matrix.hpp"
#include "octbd/quantize.hpp"

namespace octbd {

struct OpticsConfig;

enum class Interpolation { Linear, Cubic };
enum class Apodization { None, Hann };

struct DisplayWindow {
  double floor_db = 0.0;
  double ceil_db = 0.0;

  bool operator==(const DisplayWindow&) const = default;
};

struct PipelineConfig {
  /// Acquisition mapping; k_linearize inverts it onto a uniform grid.
  KMapping k_mapping;
  Interpolation interpolation = Interpolation::Linear;
  /// Phase removed by compensate_dispersion: multiply by exp(-i(a2 xi^2 + a3 xi^3)).
  double dispersion_a2 = 0.0;
  double dispersion_a3 = 0.0;
  Apodization apodization = Apodization::Hann;
  BackgroundMode background = BackgroundMode::PerAline;
  /// Optional reference-arm spectrum in 12-bit counts, removed after the
  /// per-A-line mean. Empty disables the stage.
  std::vector<double> reference_spectrum;
  DisplayWindow window{40.0, 90.0};
  std::size_t resize_height = 256;
  std::size_t resize_width = 256;

  /// Throws ConfigError on floor >= ceil or an empty resize target.
  void validate() const;

  /// Configuration that undoes the given optics: same k-mapping, opposite
  /// dispersion coefficients and the matching reference spectrum.
  static PipelineConfig matched(const OpticsConfig& optics, std::size_t samples_per_aline);

  bool operator==(const PipelineConfig&) const = default;
};

/// Display-normalized log-magnitude image, pixels in [0, 1].
struct BScan {
  RealMatrix pixels;
  int bit_depth_label = kNativeBitDepth;
  DisplayWindow window;
};

/// Resamples every A-line onto the uniform wavenumber grid spanning
/// [kappa(0), kappa(n-1)]. Throws ConfigError for a non-monotone mapping.
BackgroundSubtractedFrame k_linearize(const BackgroundSubtractedFrame& frame,
                                      const PipelineConfig& config);

/// One-sided complex signal of a real spectrum. The retained side is chosen
/// so that exp(-i*2*pi*u*z/n) content maps to depth bin z under the inverse
/// transform; the real part equals the input.
std::vector<std::complex<double>> analytic_signal(std::span<const double> spectrum);

ComplexMatrix compensate_dispersion(const BackgroundSubtractedFrame& frame,
                                    const PipelineConfig& config);

/// Full-length unitary inverse DFT of one windowed A-line.
std::vector<std::complex<double>> depth_transform_full(std::span<const std::complex<double>> aline,
                                                       Apodization apodization);

/// Magnitude of the first n/2 depth bins of each A-line.
RealMatrix transform_to_depth(const ComplexMatrix& frame, const PipelineConfig& config);

/// 20*log10(mag + 1e-12) mapped linearly from the display window to [0, 1].
BScan log_compress(const RealMatrix& magnitude, const PipelineConfig& config, int bit_depth_label);

/// Bilinear resize with half-pixel centers and edge clamping.
RealMatrix resize(const RealMatrix& image, std::size_t rows, std::size_t cols);

/// Background removal, rescale to 12-bit full scale, reference removal,
/// k-linearization, dispersion compensation and depth transform.
RealMatrix depth_magnitude(const SpectralFrame& frame, const PipelineConfig& config);

/// depth_magnitude followed by log compression and resize.
BScan process_frame(const SpectralFrame& frame, const PipelineConfig& config);

/// Window shared by every image of a dataset: ceil at the given percentile of
/// all dB values, floor `dynamic_range_db` below the peak.
DisplayWindow estimate_display_window(std::span<const RealMatrix> magnitudes,
                                      double dynamic_range_db = 50.0, double ceil_percentile = 99.9);

/// Same rule applied to precomputed dB values (reordered in place).
DisplayWindow display_window_from_db(std::vector<float>& db, double dynamic_range_db = 50.0,
                                     double ceil_percentile = 99.9);

/// 20*log10(mag + 1e-12) of every element, in single precision.
std::vector<float> magnitude_db(const RealMatrix& magnitude);

inline constexpr double kLogEpsilon = 1e-12;

}  // namespace octbd
