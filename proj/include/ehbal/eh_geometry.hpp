#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <type_traits>

#include "ehbal/errors.hpp"

namespace ehbal::geom {

/// A point of C^2 \ {0}; the exceptional divisor is reachable only through
/// ChartPoint.
struct PointC2 {
  std::complex<double> z1;
  std::complex<double> z2;
};

enum class Chart { U1, U2 };

/// Blow-up chart coordinates.  The divisor locus (w1 = 0 on U1, w2 = 0 on U2)
/// is allowed.
struct ChartPoint {
  Chart chart = Chart::U1;
  std::complex<double> w1;
  std::complex<double> w2;
};

/// Quantization level m >= 1 of the radial Hermitian weight
///   w_m(z) = e^{-m sqrt(|z|^4+1)} ((1 + sqrt(|z|^4+1)) / |z|^2)^m.
struct HermitianWeight {
  int m = 1;
};

namespace detail {

inline void require_positive_level(int m, const char* where) {
  if (m < 1) throw std::domain_error(std::string(where) + ": requires level m >= 1");
}

inline double squared_radius(const PointC2& p) { return std::norm(p.z1) + std::norm(p.z2); }

// log((1 + t) / u) for t = sqrt(u^2 + 1), cancellation-free for every u > 0.
inline double log_one_plus_t_over_u(double u, double t) {
  return std::log1p((1.0 + 1.0 / (t + u)) / u);
}

// Extended-precision potential for nested finite differences; the extra
// mantissa bits lower the stencil noise floor by three orders of magnitude.
inline long double potential_radial_ld(long double u) {
  const long double t = std::sqrt(u * u + 1.0L);
  return u + 1.0L / (t + u) - std::log1p((1.0L + 1.0L / (t + u)) / u);
}

}  // namespace detail

/// Kaehler potential of the Ricci-flat form as a function of u = |z|^2 > 0:
///   Phi = sqrt(u^2+1) + log u - log(1 + sqrt(u^2+1)).
/// Evaluated as u + 1/(t+u) - log((1+t)/u) with t = sqrt(u^2+1), which stays
/// accurate up to u ~ 1e8 and beyond (t - u would cancel catastrophically).
inline double potential_radial(double u) {
  if (!(u > 0.0))
    throw std::domain_error("eh_geometry.potential: requires |z|^2 > 0 (origin excluded)");
  const double t = std::hypot(u, 1.0);
  return u + 1.0 / (t + u) - detail::log_one_plus_t_over_u(u, t);
}

inline double potential(const PointC2& p) { return potential_radial(detail::squared_radius(p)); }

/// Chart pullback of the potential; finite on the whole chart, including the
/// exceptional divisor.  On U1 with q = |w2|^2, s = |w1|^2 (1+q):
///   sqrt(s^2+1) + log(1+q) - log(1 + sqrt(s^2+1)),
/// and symmetrically on U2.
inline double chart_potential(const ChartPoint& c) {
  const double n1 = std::norm(c.w1);
  const double n2 = std::norm(c.w2);
  const double q = (c.chart == Chart::U1) ? n2 : n1;
  const double base = (c.chart == Chart::U1) ? n1 : n2;
  const double s = base * (1.0 + q);
  const double t = std::hypot(s, 1.0);
  return t + std::log1p(q) - std::log1p(t);
}

/// log w_m as a function of u = |z|^2:  m (log((1+t)/u) - t), t = sqrt(u^2+1).
inline double log_weight_radial(int m, double u) {
  detail::require_positive_level(m, "eh_geometry.weight");
  if (!(u > 0.0))
    throw std::domain_error("eh_geometry.weight: requires |z|^2 > 0 (origin excluded)");
  const double t = std::hypot(u, 1.0);
  return static_cast<double>(m) * (detail::log_one_plus_t_over_u(u, t) - t);
}

inline double log_weight(const HermitianWeight& w, const PointC2& p) {
  return log_weight_radial(w.m, detail::squared_radius(p));
}

/// w_m(z); computed through log_weight, so levels m > 20 do not overflow
/// intermediate powers.
inline double weight(const HermitianWeight& w, const PointC2& p) {
  return std::exp(log_weight(w, p));
}

/// 2x2 Hermitian matrix stored as two real diagonal entries and the (1,2)
/// entry; entry (2,1) is its conjugate by construction.
struct HermitianMatrix2 {
  double m11 = 0.0;
  double m22 = 0.0;
  std::complex<double> m12{0.0, 0.0};

  std::complex<double> entry(int i, int j) const {
    if (i == 0 && j == 0) return {m11, 0.0};
    if (i == 1 && j == 1) return {m22, 0.0};
    if (i == 0 && j == 1) return m12;
    if (i == 1 && j == 0) return std::conj(m12);
    throw std::out_of_range("eh_geometry.HermitianMatrix2: index out of range");
  }

  double det() const { return m11 * m22 - std::norm(m12); }

  std::array<double, 2> eigenvalues() const {
    const double tr = m11 + m22;
    const double d = std::sqrt(std::max(0.0, (m11 - m22) * (m11 - m22) + 4.0 * std::norm(m12)));
    return {0.5 * (tr - d), 0.5 * (tr + d)};
  }

  bool positive_definite() const { return eigenvalues()[0] > 0.0; }

  double max_abs_entry() const { return std::max({std::fabs(m11), std::fabs(m22), std::abs(m12)}); }
};

/// Mixed complex Hessian d^2 F / dz_i dzbar_j of a real-valued F(z1, z2) by
/// order-2 central differences in the four real coordinates, optionally with
/// one Richardson refinement (step and step/2).  All stencil arithmetic runs
/// in the scalar type F returns, so a long double integrand lowers the
/// differencing noise floor.
template <typename F>
HermitianMatrix2 complex_hessian(F&& f, std::complex<double> z1, std::complex<double> z2,
                                 double step, bool richardson = true) {
  if (!(step > 0.0))
    throw std::invalid_argument("eh_geometry.complex_hessian: requires step > 0");

  using R = std::invoke_result_t<F&, std::complex<double>, std::complex<double>>;
  struct Stencil {
    R m11, m22, re12, im12;
  };

  auto single = [&](double h) {
    // coordinate order: Re z1, Im z1, Re z2, Im z2
    auto eval = [&](const std::array<double, 4>& d) {
      return f(std::complex<double>(z1.real() + d[0], z1.imag() + d[1]),
               std::complex<double>(z2.real() + d[2], z2.imag() + d[3]));
    };
    const R f0 = eval({0.0, 0.0, 0.0, 0.0});
    const R hh = static_cast<R>(h) * static_cast<R>(h);
    auto dxx = [&](int c) {
      std::array<double, 4> p{}, m{};
      p[c] = h;
      m[c] = -h;
      return (eval(p) - R(2) * f0 + eval(m)) / hh;
    };
    auto dxy = [&](int c1, int c2) {
      std::array<double, 4> pp{}, pm{}, mp{}, mm{};
      pp[c1] = h;
      pp[c2] = h;
      pm[c1] = h;
      pm[c2] = -h;
      mp[c1] = -h;
      mp[c2] = h;
      mm[c1] = -h;
      mm[c2] = -h;
      return (eval(pp) - eval(pm) - eval(mp) + eval(mm)) / (R(4) * hh);
    };
    return Stencil{R(0.25) * (dxx(0) + dxx(1)), R(0.25) * (dxx(2) + dxx(3)),
                   R(0.25) * (dxy(0, 2) + dxy(1, 3)), R(0.25) * (dxy(0, 3) - dxy(1, 2))};
  };

  Stencil s = single(step);
  if (richardson) {
    const Stencil fine = single(0.5 * step);
    s.m11 = (R(4) * fine.m11 - s.m11) / R(3);
    s.m22 = (R(4) * fine.m22 - s.m22) / R(3);
    s.re12 = (R(4) * fine.re12 - s.re12) / R(3);
    s.im12 = (R(4) * fine.im12 - s.im12) / R(3);
  }
  HermitianMatrix2 out;
  out.m11 = static_cast<double>(s.m11);
  out.m22 = static_cast<double>(s.m22);
  out.m12 = {static_cast<double>(s.re12), static_cast<double>(s.im12)};
  return out;
}

/// Metric coefficients g_{i jbar} = d^2 Phi / dz_i dzbar_j by Richardson-refined
/// central differences.  The base step h is scaled by |z| so that the stencil
/// resolves both the near-divisor region and the flat end.
inline HermitianMatrix2 metric_matrix(const PointC2& p, double h = 1e-3) {
  if (!(h > 0.0)) throw std::invalid_argument("eh_geometry.metric_matrix: requires step h > 0");
  const double u = detail::squared_radius(p);
  if (!(u > 0.0))
    throw std::domain_error("eh_geometry.metric_matrix: origin excluded");
  const double scale = std::clamp(std::sqrt(u), 0.05, 100.0);
  auto f = [](std::complex<double> a, std::complex<double> b) {
    const long double ar = a.real(), ai = a.imag(), br = b.real(), bi = b.imag();
    return detail::potential_radial_ld(ar * ar + ai * ai + br * br + bi * bi);
  };
  return complex_hessian(f, p.z1, p.z2, h * scale, /*richardson=*/true);
}

/// Max-abs coefficient of the mixed Hessian of log det g at p.  The metric is
/// Ricci-flat, so the exact value is zero; what is returned is the
/// finite-difference residual.  The outer stencil is an order wider than the
/// metric stencil, which keeps the nested differences above the roundoff
/// floor.
inline double ricci_defect(const PointC2& p, double h = 1e-3) {
  if (!(h > 0.0)) throw std::invalid_argument("eh_geometry.ricci_defect: requires step h > 0");
  const double u = detail::squared_radius(p);
  if (!(u > 0.0)) throw std::domain_error("eh_geometry.ricci_defect: origin excluded");
  auto log_det = [h](std::complex<double> a, std::complex<double> b) {
    const double d = metric_matrix(PointC2{a, b}, h).det();
    if (!(d > 0.0))
      throw convergence_error("eh_geometry.ricci_defect: non-positive metric determinant");
    return std::log(d);
  };
  const double outer = 10.0 * h * std::clamp(std::sqrt(u), 0.1, 100.0);
  return complex_hessian(log_det, p.z1, p.z2, outer, /*richardson=*/false).max_abs_entry();
}

}  // namespace ehbal::geom
