#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "octbd/matrix.hpp"

namespace octbd {

struct MetricsConfig {
  double c1 = 1e-4;
  double c2 = 1e-4;
  double c3 = 0.5e-4;
  /// Number of scales; 1 means no downsampling.
  std::size_t scales = 1;
  double alpha = 1.0;
  /// Per-scale exponents. A single value is reused for every scale.
  std::vector<double> beta{0.0448};
  std::vector<double> gamma{0.0448};
  double max_intensity = 1.0;
  /// Side of a sliding square window; 0 uses whole-image statistics.
  std::size_t window = 0;

  void validate() const;
};

/// PSNR in dB, or the identical-images marker when the MSE is zero.
struct Psnr {
  double db = 0.0;
  bool identical = false;

  static Psnr identical_images() { return {0.0, true}; }
};

struct SsimComponents {
  double luminance = 0.0;
  double contrast = 0.0;
  double structure = 0.0;
};

/// Throws DimensionError on shape mismatch.
Psnr psnr(const RealMatrix& test, const RealMatrix& ref, const MetricsConfig& config = {});

/// Whole-image luminance, contrast and structure terms (n - 1 normalized
/// variances and covariance).
SsimComponents ssim_components(const RealMatrix& x, const RealMatrix& y,
                               const MetricsConfig& config = {});

/// L^alpha * prod_j C_j^beta_j S_j^gamma_j. Returns std::nullopt when a
/// negative structure term would be raised to a non-integer power.
std::optional<double> msssim(const RealMatrix& x, const RealMatrix& y,
                             const MetricsConfig& config = {});

/// Pearson correlation over all pixels. Throws DomainError when either image
/// is constant.
double corr2(const RealMatrix& a, const RealMatrix& b);

enum class Source { Original, Reconstructed };

const char* to_string(Source source);
Source source_from_string(const std::string& text);

struct MetricRow {
  std::string image_id;
  int bit_depth = 0;
  Source source = Source::Original;
  Psnr psnr;
  std::optional<double> msssim;
  /// Empty when the correlation is undefined.
  std::optional<double> corr2;
};

/// Mean and sample standard deviation (0 when n == 1) over n values.
struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t n = 0;
};

Summary summarize(const std::vector<double>& values);

struct AggregateRow {
  int bit_depth = 0;
  Source source = Source::Original;
  std::size_t count = 0;
  Summary psnr;
  std::size_t psnr_identical = 0;
  Summary msssim;
  std::size_t msssim_invalid = 0;
  Summary corr2;
  std::size_t corr2_undefined = 0;
};

struct MetricsReport {
  std::vector<MetricRow> rows;
  /// Sorted by bit depth, original before reconstructed.
  std::vector<AggregateRow> aggregates;
};

/// Evaluates all three metrics of `test` against `ref`.
MetricRow evaluate_pair(const std::string& image_id, int bit_depth, Source source,
                        const RealMatrix& test, const RealMatrix& ref,
                        const MetricsConfig& config = {});

/// Groups rows by (bit depth, source). Throws DataError on empty input.
MetricsReport aggregate(std::vector<MetricRow> rows);

}  // namespace octbd
