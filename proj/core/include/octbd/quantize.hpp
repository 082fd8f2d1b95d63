#pragma once

#include <cstdint>
#include <vector>

#include "octbd/frame.hpp"
#include "octbd/matrix.hpp"

namespace octbd {

/// Reduced-resolution code of a 12-bit sample: floor(I * 2^bits / 2^12),
/// evaluated in integer arithmetic.
constexpr std::uint16_t requantize_sample(std::uint16_t code, int bits) noexcept {
  return static_cast<std::uint16_t>((static_cast<std::uint32_t>(code) << bits) >> kNativeBitDepth);
}

/// Re-expresses a native 12-bit frame at `bits` of resolution.
/// Throws DomainError unless 1 <= bits <= 12, PreconditionError unless the
/// input is 12-bit.
SpectralFrame requantize(const SpectralFrame& frame, int bits);

enum class BackgroundMode {
  /// Remove each A-line's own mean (column = A-line).
  PerAline,
  /// Remove the mean spectrum across A-lines (column = wavenumber sample).
  MeanSpectrum,
};

struct BackgroundSubtractedFrame {
  RealMatrix values;
  int source_bit_depth = kNativeBitDepth;
  BackgroundMode mode = BackgroundMode::PerAline;
  /// Per-A-line means (PerAline) or the mean spectrum (MeanSpectrum).
  std::vector<double> removed_means;
};

BackgroundSubtractedFrame subtract_background(const SpectralFrame& frame,
                                              BackgroundMode mode = BackgroundMode::PerAline);

}  // namespace octbd
