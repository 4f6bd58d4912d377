#pragma once

// Special functions used by the Bayesian scores and the baselines.
// Everything here is dependency-free and deterministic.

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

namespace obf::special {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Lanczos approximation, g = 7 with 9 coefficients.
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczosCoef = {
    0.99999999999980993227684700473478,  676.520368121885098567009190444019,
    -1259.13921672240287047156078755283, 771.3234287776530788486528258894,
    -176.61502916214059906584551354,     12.507343278686904814458936853,
    -0.13857109526572011689554707,       9.984369578019570859563e-6,
    1.50563273514931155834e-7};

// Natural log of |Gamma(x)|. Uses reflection for x < 0.5.
inline double lgamma(double x) {
  if (std::isnan(x)) return x;
  if (x == 1.0 || x == 2.0) return 0.0;
  if (x < 0.5) {
    const double s = std::sin(std::numbers::pi * x);
    if (s == 0.0) return std::numeric_limits<double>::infinity();
    return std::log(std::numbers::pi / std::fabs(s)) - lgamma(1.0 - x);
  }
  const double z = x - 1.0;
  double a = kLanczosCoef[0];
  for (std::size_t i = 1; i < kLanczosCoef.size(); ++i) a += kLanczosCoef[i] / (z + static_cast<double>(i));
  const double t = z + kLanczosG + 0.5;
  return 0.5 * kLog2Pi + (z + 0.5) * std::log(t) - t + std::log(a);
}

inline double lbeta(double a, double b) { return lgamma(a) + lgamma(b) - lgamma(a + b); }

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-12;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double dm = static_cast<double>(m);
    const double m2 = 2.0 * dm;
    double aa = dm * (b - dm) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + dm) * (qab + dm) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps * 1e-3) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1].
inline double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0) || std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log1p(-x) - lbeta(a, b);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * detail::beta_cf(a, b, x) / a;
  return 1.0 - std::exp(log_front) * detail::beta_cf(b, a, 1.0 - x) / b;
}

// Two-sided p-value P(|T| >= |t|) for Student's t with df degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  if (std::isnan(t) || !(df > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(0.5 * df, 0.5, x);
}

inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  if (x == std::numeric_limits<double>::infinity()) return x;
  return std::fmax(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double log_sum_exp(std::span<const double> xs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : xs) hi = std::fmax(hi, x);
  if (std::isinf(hi)) return hi;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - hi);
  return hi + std::log(acc);
}

}  // namespace obf::special
