#include "octbd/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "octbd/error.hpp"
#include "octbd/fft.hpp"
#include "octbd/phantom.hpp"

namespace octbd {
namespace {

// Uniform target grid spanning the acquired wavenumber range.
std::vector<double> uniform_grid(const KMapping& mapping, std::size_t n) {
  std::vector<double> grid(n);
  if (n == 0) return grid;
  const double first = mapping(0.0, n);
  const double last = mapping(static_cast<double>(n - 1), n);
  const double step = n > 1 ? (last - first) / static_cast<double>(n - 1) : 0.0;
  for (std::size_t t = 0; t < n; ++t) grid[t] = first + step * static_cast<double>(t);
  grid.back() = last;
  return grid;
}

// Location of a target wavenumber among the acquired ones: segment index i
// with kappa[i] <= target <= kappa[i + 1].
std::size_t find_segment(const std::vector<double>& kappa, double target) {
  const auto it = std::upper_bound(kappa.begin(), kappa.end(), target);
  const auto idx = static_cast<std::size_t>(std::distance(kappa.begin(), it));
  return std::clamp<std::size_t>(idx == 0 ? 0 : idx - 1, 0, kappa.size() - 2);
}

// Four-point Lagrange interpolation on a nonuniform grid.
double lagrange4(const double* xs, const double* ys, double x) {
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    double w = 1.0;
    for (int b = 0; b < 4; ++b) {
      if (b != a) w *= (x - xs[b]) / (xs[a] - xs[b]);
    }
    acc += w * ys[a];
  }
  return acc;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1)));
  }
  return w;
}

}  // namespace

void PipelineConfig::validate() const {
  if (!(window.floor_db < window.ceil_db)) {
    throw ConfigError("log window floor (" + std::to_string(window.floor_db) +
                      " dB) must be below ceil (" + std::to_string(window.ceil_db) + " dB)");
  }
  if (resize_height == 0 || resize_width == 0) throw ConfigError("resize target must be positive");
  if (!std::isfinite(dispersion_a2) || !std::isfinite(dispersion_a3)) {
    throw ConfigError("dispersion coefficients must be finite");
  }
}

PipelineConfig PipelineConfig::matched(const OpticsConfig& optics, std::size_t samples_per_aline) {
  PipelineConfig config;
  config.k_mapping = optics.k_mapping;
  config.dispersion_a2 = -optics.dispersion_a2;
  config.dispersion_a3 = -optics.dispersion_a3;
  config.reference_spectrum = octbd::reference_spectrum(optics, samples_per_aline);
  return config;
}

BackgroundSubtractedFrame k_linearize(const BackgroundSubtractedFrame& frame,
                                      const PipelineConfig& config) {
  const std::size_t n = frame.values.rows();
  if (config.k_mapping.is_identity() || n < 2) return frame;
  if (!config.k_mapping.is_strictly_monotone(n)) {
    throw ConfigError("k-mapping " + config.k_mapping.tag() + " is not strictly monotone");
  }

  std::vector<double> kappa(n);
  for (std::size_t s = 0; s < n; ++s) kappa[s] = config.k_mapping(static_cast<double>(s), n);
  const std::vector<double> target = uniform_grid(config.k_mapping, n);
  std::vector<std::size_t> segment(n);
  for (std::size_t t = 0; t < n; ++t) segment[t] = find_segment(kappa, target[t]);

  BackgroundSubtractedFrame out = frame;
  for (std::size_t j = 0; j < frame.values.cols(); ++j) {
    const auto in = frame.values.column(j);
    auto dst = out.values.column(j);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t i = segment[t];
      if (config.interpolation == Interpolation::Linear || n < 4) {
        const double f = (target[t] - kappa[i]) / (kappa[i + 1] - kappa[i]);
        dst[t] = in[i] + f * (in[i + 1] - in[i]);
      } else {
        const std::size_t base = std::clamp<std::size_t>(i == 0 ? 0 : i - 1, 0, n - 4);
        dst[t] = lagrange4(&kappa[base], &in[base], target[t]);
      }
    }
  }
  return out;
}

std::vector<std::complex<double>> analytic_signal(std::span<const double> spectrum) {
  const std::size_t n = spectrum.size();
  std::vector<std::complex<double>> time(spectrum.begin(), spectrum.end());
  std::vector<std::complex<double>> freq(n);
  dft(time, freq, FftDirection::Forward);
  // Keep DC and Nyquist once, double the negative-frequency half, drop the rest.
  const std::size_t half = n / 2;
  for (std::size_t m = 1; m < n; ++m) {
    if (n % 2 == 0 && m == half) continue;
    freq[m] = m > half ? 2.0 * freq[m] : std::complex<double>{};
  }
  dft(freq, time, FftDirection::Inverse);
  const double scale = n > 0 ? 1.0 / static_cast<double>(n) : 0.0;
  for (auto& v : time) v *= scale;
  return time;
}

ComplexMatrix compensate_dispersion(const BackgroundSubtractedFrame& frame,
                                    const PipelineConfig& config) {
  const std::size_t n = frame.values.rows();
  ComplexMatrix out(n, frame.values.cols());
  const bool zero_phase = config.dispersion_a2 == 0.0 && config.dispersion_a3 == 0.0;
  std::vector<std::complex<double>> rotation;
  if (!zero_phase) {
    const std::vector<double> grid = uniform_grid(config.k_mapping, n);
    rotation.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      rotation[t] = std::polar(1.0, -dispersion_phase(grid[t], n, config.dispersion_a2, config.dispersion_a3));
    }
  }
  for (std::size_t j = 0; j < frame.values.cols(); ++j) {
    auto analytic = analytic_signal(frame.values.column(j));
    auto dst = out.column(j);
    for (std::size_t t = 0; t < n; ++t) dst[t] = zero_phase ? analytic[t] : analytic[t] * rotation[t];
  }
  return out;
}

std::vector<std::complex<double>> depth_transform_full(std::span<const std::complex<double>> aline,
                                                       Apodization apodization) {
  const std::size_t n = aline.size();
  std::vector<std::complex<double>> windowed(aline.begin(), aline.end());
  if (apodization == Apodization::Hann) {
    const auto w = hann_window(n);
    for (std::size_t i = 0; i < n; ++i) windowed[i] *= w[i];
  }
  std::vector<std::complex<double>> depth(n);
  dft(windowed, depth, FftDirection::Inverse);
  const double scale = n > 0 ? 1.0 / std::sqrt(static_cast<double>(n)) : 0.0;
  for (auto& v : depth) v *= scale;
  return depth;
}

RealMatrix transform_to_depth(const ComplexMatrix& frame, const PipelineConfig& config) {
  const std::size_t n = frame.rows();
  const std::size_t half = n / 2;
  RealMatrix out(half, frame.cols());
  for (std::size_t j = 0; j < frame.cols(); ++j) {
    const auto depth = depth_transform_full(frame.column(j), config.apodization);
    auto dst = out.column(j);
    for (std::size_t d = 0; d < half; ++d) dst[d] = std::abs(depth[d]);
  }
  return out;
}

BScan log_compress(const RealMatrix& magnitude, const PipelineConfig& config, int bit_depth_label) {
  config.validate();
  const double floor_db = config.window.floor_db;
  const double range = config.window.ceil_db - floor_db;
  BScan scan;
  scan.bit_depth_label = bit_depth_label;
  scan.window = config.window;
  scan.pixels = RealMatrix(magnitude.rows(), magnitude.cols());
  const auto in = magnitude.values();
  auto out = scan.pixels.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double db = 20.0 * std::log10(in[i] + kLogEpsilon);
    out[i] = std::clamp((db - floor_db) / range, 0.0, 1.0);
  }
  return scan;
}

RealMatrix resize(const RealMatrix& image, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw ConfigError("resize target must be positive");
  if (image.empty()) throw DimensionError("cannot resize an empty image");
  if (image.rows() == rows && image.cols() == cols) return image;

  auto taps = [](std::size_t out_n, std::size_t in_n) {
    struct Tap {
      std::size_t lo, hi;
      double frac;
    };
    std::vector<Tap> result(out_n);
    const double scale = static_cast<double>(in_n) / static_cast<double>(out_n);
    const double last = static_cast<double>(in_n - 1);
    for (std::size_t o = 0; o < out_n; ++o) {
      const double src = std::clamp((static_cast<double>(o) + 0.5) * scale - 0.5, 0.0, last);
      const auto lo = static_cast<std::size_t>(std::floor(src));
      const std::size_t hi = std::min(lo + 1, in_n - 1);
      result[o] = {lo, hi, src - static_cast<double>(lo)};
    }
    return result;
  };
  const auto row_taps = taps(rows, image.rows());
  const auto col_taps = taps(cols, image.cols());

  RealMatrix out(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const auto& ct = col_taps[c];
    for (std::size_t r = 0; r < rows; ++r) {
      const auto& rt = row_taps[r];
      const double top = image(rt.lo, ct.lo) + ct.frac * (image(rt.lo, ct.hi) - image(rt.lo, ct.lo));
      const double bottom = image(rt.hi, ct.lo) + ct.frac * (image(rt.hi, ct.hi) - image(rt.hi, ct.lo));
      out(r, c) = std::clamp(top + rt.frac * (bottom - top), 0.0, 1.0);
    }
  }
  return out;
}

RealMatrix depth_magnitude(const SpectralFrame& frame, const PipelineConfig& config) {
  BackgroundSubtractedFrame bs = subtract_background(frame, config.background);

  // Every bit depth spans the same analog full scale; bring codes back to
  // 12-bit units. The gain is a power of two, so 12-bit input is untouched.
  const double gain = std::ldexp(1.0, kNativeBitDepth - frame.bit_depth);
  if (gain != 1.0) {
    for (auto& v : bs.values.values()) v *= gain;
  }

  if (!config.reference_spectrum.empty() && config.background == BackgroundMode::PerAline) {
    const std::size_t n = frame.samples_per_aline();
    if (config.reference_spectrum.size() != n) {
      throw ConfigError("reference spectrum has " + std::to_string(config.reference_spectrum.size()) +
                        " samples, frame has " + std::to_string(n));
    }
    double mean = 0.0;
    for (double v : config.reference_spectrum) mean += v;
    mean /= static_cast<double>(n);
    for (std::size_t j = 0; j < bs.values.cols(); ++j) {
      auto col = bs.values.column(j);
      for (std::size_t s = 0; s < n; ++s) col[s] -= config.reference_spectrum[s] - mean;
    }
  }

  const BackgroundSubtractedFrame linear = k_linearize(bs, config);
  return transform_to_depth(compensate_dispersion(linear, config), config);
}

BScan process_frame(const SpectralFrame& frame, const PipelineConfig& config) {
  config.validate();
  BScan scan = log_compress(depth_magnitude(frame, config), config, frame.bit_depth);
  scan.pixels = resize(scan.pixels, config.resize_height, config.resize_width);
  return scan;
}

std::vector<float> magnitude_db(const RealMatrix& magnitude) {
  std::vector<float> db;
  db.reserve(magnitude.size());
  for (double v : magnitude.values()) db.push_back(static_cast<float>(20.0 * std::log10(v + kLogEpsilon)));
  return db;
}

DisplayWindow display_window_from_db(std::vector<float>& db, double dynamic_range_db,
                                     double ceil_percentile) {
  if (db.empty()) throw DataError("cannot estimate a display window without images");
  const double peak = *std::max_element(db.begin(), db.end());
  // Nearest rank; the tolerance keeps 99.9% of 1000 at rank 999.
  const double rank = std::ceil(ceil_percentile / 100.0 * static_cast<double>(db.size()) - 1e-9);
  const auto index =
      static_cast<std::size_t>(std::clamp(rank - 1.0, 0.0, static_cast<double>(db.size() - 1)));
  std::nth_element(db.begin(), db.begin() + static_cast<std::ptrdiff_t>(index), db.end());
  DisplayWindow window;
  window.ceil_db = db[index];
  window.floor_db = peak - dynamic_range_db;
  // A peak far above the percentile would leave an empty window.
  if (!(window.floor_db < window.ceil_db)) window.floor_db = window.ceil_db - dynamic_range_db;
  return window;
}

DisplayWindow estimate_display_window(std::span<const RealMatrix> magnitudes, double dynamic_range_db,
                                      double ceil_percentile) {
  std::vector<float> db;
  for (const auto& m : magnitudes) {
    const auto part = magnitude_db(m);
    db.insert(db.end(), part.begin(), part.end());
  }
  return display_window_from_db(db, dynamic_range_db, ceil_percentile);
}

}  // namespace octbd
