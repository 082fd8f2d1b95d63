#include "octbd/quantize.hpp"

#include <string>

#include "octbd/error.hpp"

namespace octbd {

SpectralFrame requantize(const SpectralFrame& frame, int bits) {
  if (bits < 1 || bits > kNativeBitDepth) {
    throw DomainError("bit depth must lie in 1..12, got " + std::to_string(bits));
  }
  if (frame.bit_depth != kNativeBitDepth) {
    throw PreconditionError("requantize expects a 12-bit frame, got " +
                            std::to_string(frame.bit_depth) + "-bit");
  }
  SpectralFrame out = frame;
  out.bit_depth = bits;
  for (auto& code : out.samples.values()) code = requantize_sample(code, bits);
  return out;
}

BackgroundSubtractedFrame subtract_background(const SpectralFrame& frame, BackgroundMode mode) {
  const std::size_t rows = frame.samples_per_aline();
  const std::size_t cols = frame.num_alines();
  BackgroundSubtractedFrame out;
  out.values = RealMatrix(rows, cols);
  out.source_bit_depth = frame.bit_depth;
  out.mode = mode;
  if (rows == 0 || cols == 0) return out;

  if (mode == BackgroundMode::PerAline) {
    out.removed_means.resize(cols);
    for (std::size_t j = 0; j < cols; ++j) {
      const auto in = frame.samples.column(j);
      // Integer sum is exact for any realistic frame size.
      std::uint64_t sum = 0;
      for (auto v : in) sum += v;
      const double mean = static_cast<double>(sum) / static_cast<double>(rows);
      out.removed_means[j] = mean;
      auto dst = out.values.column(j);
      for (std::size_t s = 0; s < rows; ++s) dst[s] = static_cast<double>(in[s]) - mean;
    }
  } else {
    std::vector<std::uint64_t> sums(rows, 0);
    for (std::size_t j = 0; j < cols; ++j) {
      const auto in = frame.samples.column(j);
      for (std::size_t s = 0; s < rows; ++s) sums[s] += in[s];
    }
    out.removed_means.resize(rows);
    for (std::size_t s = 0; s < rows; ++s) {
      out.removed_means[s] = static_cast<double>(sums[s]) / static_cast<double>(cols);
    }
    for (std::size_t j = 0; j < cols; ++j) {
      const auto in = frame.samples.column(j);
      auto dst = out.values.column(j);
      for (std::size_t s = 0; s < rows; ++s) dst[s] = static_cast<double>(in[s]) - out.removed_means[s];
    }
  }
  return out;
}

}  // namespace octbd
