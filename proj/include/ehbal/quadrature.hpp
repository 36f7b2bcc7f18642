#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "ehbal/errors.hpp"

namespace ehbal::quadrature {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int panels = 0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
};

inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
};

// Weights of the embedded Gauss rule; its nodes are the odd-index Kronrod nodes.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
};

template <typename F>
std::pair<double, double> gauss_kronrod_15(F&& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double kronrod = kKronrodWeights[7] * fc;
  double gauss = kGaussWeights[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double fsum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * fsum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * fsum;
  }
  kronrod *= half;
  gauss *= half;
  return {kronrod, std::fabs(kronrod - gauss)};
}

struct Panel {
  double a, b, value, error;
};

}  // namespace detail

/// Adaptive Gauss-Kronrod 15(7) with worst-panel-first bisection.
///
/// Stops when the summed error estimate drops below
/// max(abs_tol, rel_tol * |integral|); throws convergence_error if the panel
/// budget is exhausted first.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol, double rel_tol,
                                    int max_panels = 4000) {
  if (!(b > a)) throw std::invalid_argument("quadrature.integrate_adaptive: requires b > a");

  std::vector<detail::Panel> panels;
  panels.reserve(64);
  {
    auto [v, e] = detail::gauss_kronrod_15(f, a, b);
    panels.push_back({a, b, v, e});
  }

  const double min_width = 64.0 * std::numeric_limits<double>::epsilon() * (b - a);
  while (true) {
    double total = 0.0, total_err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      total += panels[i].value;
      total_err += panels[i].error;
      if (panels[i].error > panels[worst].error) worst = i;
    }
    const double target = std::max(abs_tol, rel_tol * std::fabs(total));
    if (total_err <= target) return {total, total_err, static_cast<int>(panels.size())};

    // Roundoff floor: the worst panel cannot be improved further.
    if (panels[worst].error <= 4.0 * std::numeric_limits<double>::epsilon() * std::fabs(total) ||
        panels[worst].b - panels[worst].a <= min_width)
      return {total, total_err, static_cast<int>(panels.size())};

    if (static_cast<int>(panels.size()) >= max_panels)
      throw convergence_error("quadrature.integrate_adaptive: panel budget exhausted");

    const detail::Panel p = panels[worst];
    const double mid = 0.5 * (p.a + p.b);
    auto [lv, le] = detail::gauss_kronrod_15(f, p.a, mid);
    auto [rv, re] = detail::gauss_kronrod_15(f, mid, p.b);
    panels[worst] = {p.a, mid, lv, le};
    panels.push_back({mid, p.b, rv, re});
  }
}

}  // namespace ehbal::quadrature
