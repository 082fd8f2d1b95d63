#include "octbd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "octbd/error.hpp"

namespace octbd {
namespace {

void require_same_shape(const RealMatrix& a, const RealMatrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": image shapes differ (" + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()) + ")");
  }
  if (a.empty()) throw DimensionError(std::string(what) + ": empty image");
}

struct Moments {
  double mean_x = 0.0;
  double mean_y = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  double cov = 0.0;
};

// Two-pass sample moments over a rectangular block.
Moments moments(const RealMatrix& x, const RealMatrix& y, std::size_t r0, std::size_t c0, std::size_t rows,
                std::size_t cols) {
  const double n = static_cast<double>(rows * cols);
  Moments m;
  for (std::size_t c = c0; c < c0 + cols; ++c) {
    for (std::size_t r = r0; r < r0 + rows; ++r) {
      m.mean_x += x(r, c);
      m.mean_y += y(r, c);
    }
  }
  m.mean_x /= n;
  m.mean_y /= n;
  for (std::size_t c = c0; c < c0 + cols; ++c) {
    for (std::size_t r = r0; r < r0 + rows; ++r) {
      const double dx = x(r, c) - m.mean_x;
      const double dy = y(r, c) - m.mean_y;
      m.var_x += dx * dx;
      m.var_y += dy * dy;
      m.cov += dx * dy;
    }
  }
  const double dof = n > 1.0 ? n - 1.0 : 1.0;
  m.var_x /= dof;
  m.var_y /= dof;
  m.cov /= dof;
  return m;
}

SsimComponents components_from(const Moments& m, const MetricsConfig& config) {
  // sigma_x * sigma_y as sqrt(var_x * var_y): exact when x and y coincide.
  const double sigma_xy = std::sqrt(m.var_x * m.var_y);
  SsimComponents out;
  out.luminance = (2.0 * m.mean_x * m.mean_y + config.c1) /
                  (m.mean_x * m.mean_x + m.mean_y * m.mean_y + config.c1);
  out.contrast = (2.0 * sigma_xy + config.c2) / (m.var_x + m.var_y + config.c2);
  out.structure = (m.cov + config.c3) / (sigma_xy + config.c3);
  return out;
}

double exponent_at(const std::vector<double>& values, std::size_t scale) {
  return scale < values.size() ? values[scale] : values.back();
}

// base^exponent, or nullopt when the real power is undefined.
std::optional<double> real_power(double base, double exponent) {
  if (base < 0.0 && exponent != std::floor(exponent)) return std::nullopt;
  return std::pow(base, exponent);
}

RealMatrix downsample2(const RealMatrix& image) {
  const std::size_t rows = std::max<std::size_t>(1, image.rows() / 2);
  const std::size_t cols = std::max<std::size_t>(1, image.cols() / 2);
  RealMatrix out(rows, cols);
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t r1 = std::min(2 * r + 1, image.rows() - 1);
      const std::size_t c1 = std::min(2 * c + 1, image.cols() - 1);
      out(r, c) = 0.25 * (image(2 * r, 2 * c) + image(r1, 2 * c) + image(2 * r, c1) + image(r1, c1));
    }
  }
  return out;
}

std::optional<double> single_scale(const SsimComponents& s, const MetricsConfig& config) {
  const auto l = real_power(s.luminance, config.alpha);
  const auto c = real_power(s.contrast, exponent_at(config.beta, 0));
  const auto st = real_power(s.structure, exponent_at(config.gamma, 0));
  if (!l || !c || !st) return std::nullopt;
  return *l * *c * *st;
}

}  // namespace

void MetricsConfig::validate() const {
  if (!(c1 > 0.0 && c2 > 0.0 && c3 > 0.0)) throw ConfigError("stability constants must be positive");
  if (scales < 1) throw ConfigError("scale count must be at least 1");
  if (beta.empty() || gamma.empty()) throw ConfigError("exponent lists must not be empty");
  if (!(max_intensity > 0.0)) throw ConfigError("max_intensity must be positive");
  if (window > 0 && scales > 1) throw ConfigError("windowed statistics support a single scale only");
}

Psnr psnr(const RealMatrix& test, const RealMatrix& ref, const MetricsConfig& config) {
  require_same_shape(test, ref, "psnr");
  const auto a = test.values();
  const auto b = ref.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  const double mse = sum / static_cast<double>(a.size());
  if (mse == 0.0) return Psnr::identical_images();
  return {10.0 * std::log10(config.max_intensity * config.max_intensity / mse), false};
}

SsimComponents ssim_components(const RealMatrix& x, const RealMatrix& y, const MetricsConfig& config) {
  require_same_shape(x, y, "ssim");
  return components_from(moments(x, y, 0, 0, x.rows(), x.cols()), config);
}

std::optional<double> msssim(const RealMatrix& x, const RealMatrix& y, const MetricsConfig& config) {
  require_same_shape(x, y, "msssim");
  config.validate();

  if (config.window > 0) {
    const std::size_t wr = std::min(config.window, x.rows());
    const std::size_t wc = std::min(config.window, x.cols());
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t c0 = 0; c0 + wc <= x.cols(); ++c0) {
      for (std::size_t r0 = 0; r0 + wr <= x.rows(); ++r0) {
        const auto value = single_scale(components_from(moments(x, y, r0, c0, wr, wc), config), config);
        if (!value) return std::nullopt;
        total += *value;
        ++count;
      }
    }
    return total / static_cast<double>(count);
  }

  RealMatrix cur_x = x;
  RealMatrix cur_y = y;
  double product = 1.0;
  for (std::size_t j = 0; j < config.scales; ++j) {
    if (j > 0) {
      cur_x = downsample2(cur_x);
      cur_y = downsample2(cur_y);
    }
    const SsimComponents s = ssim_components(cur_x, cur_y, config);
    const auto c = real_power(s.contrast, exponent_at(config.beta, j));
    const auto st = real_power(s.structure, exponent_at(config.gamma, j));
    if (!c || !st) return std::nullopt;
    product *= *c * *st;
    if (j + 1 == config.scales) {
      const auto l = real_power(s.luminance, config.alpha);
      if (!l) return std::nullopt;
      product *= *l;
    }
  }
  return product;
}

static bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double e) { return e == v.front(); });
}

double corr2(const RealMatrix& a, const RealMatrix& b) {
  require_same_shape(a, b, "corr2");
  const auto x = a.values();
  const auto y = b.values();
  // Rounding in the mean would otherwise leave a tiny nonzero spread.
  if (is_constant(x) || is_constant(y)) throw DomainError("corr2 is undefined for a constant image");
  const double n = static_cast<double>(x.size());
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_a += x[i];
    mean_b += y[i];
  }
  mean_a /= n;
  mean_b /= n;
  double num = 0.0;
  double sa = 0.0;
  double sb = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double da = x[i] - mean_a;
    const double db = y[i] - mean_b;
    num += da * db;
    sa += da * da;
    sb += db * db;
  }
  const double den = std::sqrt(sa * sb);
  if (den == 0.0) throw DomainError("corr2 is undefined for a constant image");
  return num / den;
}

const char* to_string(Source source) {
  return source == Source::Original ? "original" : "reconstructed";
}

Source source_from_string(const std::string& text) {
  if (text == "original") return Source::Original;
  if (text == "reconstructed") return Source::Reconstructed;
  throw DataError("unknown source '" + text + "'");
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.n = values.size();
  if (s.n == 0) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  }
  return s;
}

MetricRow evaluate_pair(const std::string& image_id, int bit_depth, Source source, const RealMatrix& test,
                        const RealMatrix& ref, const MetricsConfig& config) {
  MetricRow row;
  row.image_id = image_id;
  row.bit_depth = bit_depth;
  row.source = source;
  row.psnr = psnr(test, ref, config);
  row.msssim = msssim(test, ref, config);
  try {
    row.corr2 = corr2(test, ref);
  } catch (const DomainError&) {
    row.corr2.reset();
  }
  return row;
}

MetricsReport aggregate(std::vector<MetricRow> rows) {
  if (rows.empty()) throw DataError("cannot aggregate an empty set of metric rows");

  struct Bucket {
    std::size_t count = 0;
    std::vector<double> psnr, msssim, corr2;
    std::size_t identical = 0, invalid = 0, undefined = 0;
  };
  std::map<std::pair<int, Source>, Bucket> groups;
  for (const auto& row : rows) {
    auto& g = groups[{row.bit_depth, row.source}];
    ++g.count;
    if (row.psnr.identical) {
      ++g.identical;
    } else {
      g.psnr.push_back(row.psnr.db);
    }
    if (row.msssim) {
      g.msssim.push_back(*row.msssim);
    } else {
      ++g.invalid;
    }
    if (row.corr2) {
      g.corr2.push_back(*row.corr2);
    } else {
      ++g.undefined;
    }
  }

  MetricsReport report;
  for (const auto& [key, g] : groups) {
    AggregateRow agg;
    agg.bit_depth = key.first;
    agg.source = key.second;
    agg.count = g.count;
    agg.psnr = summarize(g.psnr);
    agg.psnr_identical = g.identical;
    agg.msssim = summarize(g.msssim);
    agg.msssim_invalid = g.invalid;
    agg.corr2 = summarize(g.corr2);
    agg.corr2_undefined = g.undefined;
    report.aggregates.push_back(agg);
  }
  report.rows = std::move(rows);
  return report;
}

}  // namespace octbd
