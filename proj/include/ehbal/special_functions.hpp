#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ehbal/errors.hpp"

namespace ehbal::sf {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Arguments of the upper incomplete Gamma function
///   Gamma(a, b) = integral_b^inf t^{a-1} e^{-t} dt,
/// with shape a > 0 and lower limit b >= 0.  b = 0 gives the complete Gamma.
struct GammaArgs {
  double a;
  double b;
};

namespace detail {

inline void validate(const GammaArgs& g) {
  if (!(g.a > 0.0) || !(g.b >= 0.0))
    throw std::domain_error("special_functions.gamma_upper: requires a > 0 and b >= 0");
}

// Largest x with exp(x) finite in double.
inline constexpr double kLogDoubleMax = 709.78;

// Scaled continued fraction H(a,x) with Gamma(a,x) = e^{-x} x^a H(a,x).
// Modified Lentz recurrence; effective for x >= a + 1.
inline double upper_cf_scaled(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 200000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= 1e-16) return h;
  }
  throw convergence_error("special_functions.gamma_upper: continued fraction did not converge");
}

// Regularized lower tail P(a,x) by power series; effective for x < a + 1.
inline double lower_series_regularized(double a, double x) {
  double ap = a;
  double del = 1.0 / a;
  double sum = del;
  for (int i = 0; i < 200000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-17)
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
  }
  throw convergence_error("special_functions.gamma_upper: lower series did not converge");
}

inline double log_gamma_upper_impl(double a, double b) {
  if (b == 0.0) return std::lgamma(a);
  if (b < a + 1.0) {
    const double p = lower_series_regularized(a, b);
    return std::lgamma(a) + std::log1p(-p);
  }
  return -b + a * std::log(b) + std::log(upper_cf_scaled(a, b));
}

// log( sum_{k=0}^{n} b^k / k! ).  Direct summation while the partial sums are
// representable, log-sum-exp beyond that.
inline double log_partial_exp_sum(int n, double b) {
  if (b == 0.0 || n == 0) return 0.0;
  if (b < 650.0) {
    double term = 1.0, sum = 1.0, comp = 0.0;
    for (int k = 1; k <= n; ++k) {
      term *= b / static_cast<double>(k);
      const double y = term - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    return std::log(sum);
  }
  const double logb = std::log(b);
  double lk = 0.0, maxlog = 0.0;
  for (int k = 1; k <= n; ++k) {
    lk += logb - std::log(static_cast<double>(k));
    maxlog = std::max(maxlog, lk);
  }
  lk = 0.0;
  double sum = std::exp(-maxlog);
  for (int k = 1; k <= n; ++k) {
    lk += logb - std::log(static_cast<double>(k));
    sum += std::exp(lk - maxlog);
  }
  return maxlog + std::log(sum);
}

}  // namespace detail

/// log Gamma(a, b).  Same regime split as gamma_upper; usable far beyond the
/// representable range of the unlogged value.
inline double log_gamma_upper(const GammaArgs& args) {
  detail::validate(args);
  return detail::log_gamma_upper_impl(args.a, args.b);
}

inline double log_gamma_upper(double a, double b) { return log_gamma_upper(GammaArgs{a, b}); }

/// Upper incomplete Gamma function Gamma(a, b).
///
/// Lower power series for b < a+1, continued fraction for b >= a+1.  Throws
/// std::overflow_error when the value exceeds double range (use
/// log_gamma_upper there).
inline double gamma_upper(const GammaArgs& args) {
  detail::validate(args);
  const double lg = detail::log_gamma_upper_impl(args.a, args.b);
  if (lg >= detail::kLogDoubleMax)
    throw std::overflow_error(
        "special_functions.gamma_upper: result exceeds double range; use log_gamma_upper");
  return std::exp(lg);
}

inline double gamma_upper(double a, double b) { return gamma_upper(GammaArgs{a, b}); }

/// log Gamma(n+1, b) through the exact finite sum
///   Gamma(n+1, b) = n! e^{-b} sum_{k=0}^{n} b^k / k!.
inline double log_gamma_upper_int(int n, double b) {
  if (n < 0 || !(b >= 0.0))
    throw std::domain_error("special_functions.gamma_upper_int: requires n >= 0 and b >= 0");
  return std::lgamma(static_cast<double>(n) + 1.0) - b + detail::log_partial_exp_sum(n, b);
}

/// Gamma(n+1, b) for integer shape; the exact-oracle counterpart of
/// gamma_upper.
inline double gamma_upper_int(int n, double b) {
  const double lg = log_gamma_upper_int(n, b);
  if (lg >= detail::kLogDoubleMax)
    throw std::overflow_error(
        "special_functions.gamma_upper_int: result exceeds double range; use log_gamma_upper_int");
  return std::exp(lg);
}

/// Scaled large-x form Gamma(x+k, 2x) e^{2x} (2x)^{-(x+k-1)} by the classical
/// integration-by-parts asymptotic series
///   sum_n (a-1)(a-2)...(a-n) / b^n,   a = x+k, b = 2x,
/// truncated at its minimal term.  Independent of the series/continued-fraction
/// evaluation path, so it certifies the tail regime of downstream quantities.
/// Requires x >= 30, where the minimal term is below 1e-8.
inline double gamma_upper_scaled_asymptotic(int k, double x) {
  if (!(x >= 30.0))
    throw std::domain_error("special_functions.gamma_upper_scaled_asymptotic: requires x >= 30");
  const double a = x + static_cast<double>(k);
  const double b = 2.0 * x;
  double term = 1.0, sum = 1.0;
  for (int n = 1; n < 4096; ++n) {
    const double next = term * (a - static_cast<double>(n)) / b;
    if (std::fabs(next) >= std::fabs(term)) break;  // divergent tail reached
    term = next;
    sum += term;
    if (std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
  }
  return sum;
}

inline BigInt factorial_big(int n) {
  BigInt r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Exact value of the angular integral
///   int_0^{pi/2} cos^{2j+1}(t) sin^{2k+1}(t) dt = j! k! / (2 (j+k+1)!)
/// as a reduced big-integer rational.
inline Rational beta_angular(int j, int k) {
  if (j < 0 || k < 0)
    throw std::domain_error("special_functions.beta_angular: requires j, k >= 0");
  return Rational(factorial_big(j) * factorial_big(k), 2 * factorial_big(j + k + 1));
}

}  // namespace ehbal::sf
