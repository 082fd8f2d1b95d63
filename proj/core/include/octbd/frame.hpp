#pragma once

#include <cstdint>
#include <string>

#include "octbd/matrix.hpp"

namespace octbd {

/// Native ADC resolution of the simulated acquisition.
inline constexpr int kNativeBitDepth = 12;

/// One B-frame of raw interferograms: samples_per_aline x num_alines integer
/// codes, one column per A-line.
struct SpectralFrame {
  Matrix<std::uint16_t> samples;
  int bit_depth = kNativeBitDepth;
  std::string k_grid_tag;

  std::size_t samples_per_aline() const noexcept { return samples.rows(); }
  std::size_t num_alines() const noexcept { return samples.cols(); }
  std::uint32_t max_code() const noexcept { return (1u << bit_depth) - 1u; }

  bool operator==(const SpectralFrame&) const = default;
};

}  // namespace octbd
