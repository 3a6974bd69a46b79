#pragma once

// Univariate and bivariate standard normal distribution functions.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/erf.hpp>

namespace gpva {

inline double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double norm_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal quantile; returns -inf/+inf at 0/1.
inline double norm_quantile(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("norm_quantile: p outside [0, 1]");
  if (p == 0.0) return -INFINITY;
  if (p == 1.0) return INFINITY;
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

namespace detail {

// Gauss-Legendre half-rules (positive nodes only) with 6, 12 and 20 points.
struct GaussLegendreRule {
  int size;
  std::array<double, 10> w;
  std::array<double, 10> x;
};

inline constexpr std::array<GaussLegendreRule, 3> kBvnRules{{
    {3,
     {0.1713244923791705, 0.3607615730481384, 0.4679139345726904},
     {0.9324695142031522, 0.6612093864662647, 0.2386191860831970}},
    {6,
     {0.04717533638651177, 0.1069393259953183, 0.1600783285433464, 0.2031674267230659,
      0.2334925365383547, 0.2491470458134029},
     {0.9815606342467191, 0.9041172563704750, 0.7699026741943050, 0.5873179542866171,
      0.3678314989981802, 0.1252334085114692}},
    {10,
     {0.01761400713915212, 0.04060142980038694, 0.06267204833410906, 0.08327674157670475,
      0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183821,
      0.1491729864726037, 0.1527533871307259},
     {0.9931285991850949, 0.9639719272779138, 0.9122344282513259, 0.8391169718222188,
      0.7463319064601508, 0.6360536807265150, 0.5108670019508271, 0.3737060887154196,
      0.2277858511416451, 0.07652652113349733}},
}};

// Upper orthant probability P(X > h, Y > k) for finite h, k (Drezner-Wesolowsky
// as refined by Genz). Accurate to roughly double precision.
inline double bvn_upper(double h, double k, double r) {
  const double ar = std::abs(r);
  const GaussLegendreRule &rule = ar < 0.3 ? kBvnRules[0] : (ar < 0.75 ? kBvnRules[1] : kBvnRules[2]);
  constexpr double two_pi = 2.0 * std::numbers::pi;

  double hk = h * k;
  double bvn = 0.0;

  if (ar < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (int i = 0; i < rule.size; ++i) {
      double sn = std::sin(asr * (1.0 - rule.x[i]) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (1.0 + rule.x[i]) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * two_pi) + norm_cdf(-h) * norm_cdf(-k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (ar < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    double asr = -(bs / as + hk) / 2.0;
    if (asr > -100.0)
      bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -100.0) {
      const double b = std::sqrt(bs);
      const double sp = std::sqrt(two_pi) * norm_cdf(-b / a);
      bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (int i = 0; i < rule.size; ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double xs = std::pow(a * (sign * rule.x[i] + 1.0), 2);
        const double rs = std::sqrt(1.0 - xs);
        asr = -(bs / xs + hk) / 2.0;
        if (asr > -100.0) {
          const double sp = 1.0 + c * xs * (1.0 + d * xs);
          const double ep = std::exp(-hk * xs / (2.0 * (1.0 + rs) * (1.0 + rs))) / rs;
          bvn += a * rule.w[i] * std::exp(asr) * (ep - sp);
        }
      }
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) return bvn + norm_cdf(-std::max(h, k));
  if (h >= k) return -bvn;
  const double lower = h < 0.0 ? norm_cdf(k) - norm_cdf(h) : norm_cdf(-h) - norm_cdf(-k);
  return lower - bvn;
}

} // namespace detail

/// P(Z1 <= h, Z2 <= k) for a standard bivariate normal with correlation rho.
/// Infinite limits are accepted; |rho| must be strictly below 1.
inline double bvn_cdf(double h, double k, double rho) {
  if (!(std::abs(rho) < 1.0)) throw std::domain_error("bvn_cdf: |rho| must be < 1");
  if (std::isnan(h) || std::isnan(k)) throw std::domain_error("bvn_cdf: NaN limit");
  if (h == -INFINITY || k == -INFINITY) return 0.0;
  if (h == INFINITY) return k == INFINITY ? 1.0 : norm_cdf(k);
  if (k == INFINITY) return norm_cdf(h);
  const double p = detail::bvn_upper(-h, -k, rho);
  return std::clamp(p, 0.0, 1.0);
}

/// Probability of the rectangle (h0, h1] x (k0, k1].
inline double bvn_rect(double h0, double h1, double k0, double k1, double rho) {
  const double p = bvn_cdf(h1, k1, rho) - bvn_cdf(h0, k1, rho) - bvn_cdf(h1, k0, rho) + bvn_cdf(h0, k0, rho);
  return std::max(p, 0.0);
}

} // namespace gpva
