#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace octbd {

/// Maps an acquisition sample index to wavenumber, in units of the uniform
/// grid index. With x = s / (n - 1) the mapping is kappa(s) = (n - 1) * p(x)
/// for the polynomial p(x) = sum_i c_i x^i. A fringe from a reflector at depth
/// pixel z oscillates as cos(2*pi*kappa*z / n), so after resampling onto the
/// uniform grid kappa = 0..n-1 the reflector lands in depth bin z.
class KMapping {
 public:
  KMapping() : coeffs_{0.0, 1.0} {}
  explicit KMapping(std::vector<double> coefficients);

  static KMapping identity() { return {}; }
  /// p(x) = x + q * (x^2 - x): endpoints fixed, mild quadratic warp for |q| < 1.
  static KMapping quadratic(double q);

  double operator()(double sample, std::size_t n) const;
  /// d kappa / d sample.
  double slope(double sample, std::size_t n) const;

  bool is_identity() const;
  /// True when kappa increases strictly across [0, n - 1].
  bool is_strictly_monotone(std::size_t n) const;

  const std::vector<double>& coefficients() const noexcept { return coeffs_; }

  /// Round-trippable identifier, e.g. "poly:0,0.92,0.08".
  std::string tag() const;
  /// Parses a tag produced by tag(). Throws ConfigError on anything else.
  static KMapping from_tag(std::string_view tag);

  bool operator==(const KMapping&) const = default;

 private:
  std::vector<double> coeffs_;
};

/// Dispersion phase a2*xi^2 + a3*xi^3 at wavenumber kappa, where
/// xi = (kappa - n/2) / (n/2) is the offset from the grid center normalized
/// to the half bandwidth.
double dispersion_phase(double kappa, std::size_t n, double a2, double a3);

}  // namespace octbd
