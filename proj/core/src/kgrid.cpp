#include "octbd/kgrid.hpp"

#include <charconv>
#include <cstdio>
#include <string>

#include "octbd/error.hpp"

namespace octbd {
namespace {

double eval_poly(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double eval_poly_derivative(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 1;) acc = acc * x + static_cast<double>(i) * c[i];
  return acc;
}

}  // namespace

KMapping::KMapping(std::vector<double> coefficients) : coeffs_(std::move(coefficients)) {
  if (coeffs_.empty()) throw ConfigError("k-mapping needs at least one coefficient");
}

KMapping KMapping::quadratic(double q) { return KMapping({0.0, 1.0 - q, q}); }

double KMapping::operator()(double sample, std::size_t n) const {
  if (is_identity()) return sample;
  const double span = static_cast<double>(n - 1);
  return span * eval_poly(coeffs_, sample / span);
}

double KMapping::slope(double sample, std::size_t n) const {
  if (is_identity()) return 1.0;
  const double span = static_cast<double>(n - 1);
  return eval_poly_derivative(coeffs_, sample / span);
}

bool KMapping::is_identity() const {
  return coeffs_.size() == 2 && coeffs_[0] == 0.0 && coeffs_[1] == 1.0;
}

bool KMapping::is_strictly_monotone(std::size_t n) const {
  if (n < 2) return true;
  double previous = (*this)(0.0, n);
  for (std::size_t s = 1; s < n; ++s) {
    const double current = (*this)(static_cast<double>(s), n);
    if (!(current > previous)) return false;
    previous = current;
  }
  // Integer samples can straddle a local extremum; probe the derivative too.
  constexpr int kProbesPerSample = 4;
  for (std::size_t p = 0; p <= kProbesPerSample * (n - 1); ++p) {
    if (!(slope(static_cast<double>(p) / kProbesPerSample, n) > 0.0)) return false;
  }
  return true;
}

std::string KMapping::tag() const {
  std::string out = "poly:";
  char buf[32];
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    if (i > 0) out += ',';
    std::snprintf(buf, sizeof buf, "%.17g", coeffs_[i]);
    out += buf;
  }
  return out;
}

KMapping KMapping::from_tag(std::string_view tag) {
  constexpr std::string_view prefix = "poly:";
  if (tag.substr(0, prefix.size()) != prefix) {
    throw ConfigError("unrecognized k-grid tag '" + std::string(tag) + "'");
  }
  std::vector<double> coeffs;
  std::string_view rest = tag.substr(prefix.size());
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string item(rest.substr(0, comma));
    try {
      std::size_t used = 0;
      coeffs.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("bad coefficient '" + item + "' in k-grid tag");
    }
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return KMapping(std::move(coeffs));
}

double dispersion_phase(double kappa, std::size_t n, double a2, double a3) {
  const double half = static_cast<double>(n) / 2.0;
  const double xi = (kappa - half) / half;
  return xi * xi * (a2 + a3 * xi);
}

}  // namespace octbd
