#pragma once

#include <complex>
#include <span>

namespace octbd {

enum class FftDirection { Forward, Inverse };

/// Unnormalized discrete Fourier transform. Forward uses exp(-2*pi*i*mn/N),
/// Inverse uses exp(+2*pi*i*mn/N). `in` and `out` must not alias and must have
/// equal length. Safe to call from several threads.
void dft(std::span<const std::complex<double>> in, std::span<std::complex<double>> out,
         FftDirection direction);

}  // namespace octbd
