#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ehbal/errors.hpp"
#include "ehbal/io.hpp"
#include "ehbal/moments.hpp"
#include "ehbal/special_functions.hpp"

namespace ehbal::obstruction {

/// log of the balanced-constant candidate read off the lowest monomial z1^m:
///   C = (2m/e^2)^m m(m+1) / (Gamma(m+2, 2m) - m Gamma(m+1, 2m)).
inline double log_c_from_lowest_norm(int m) {
  if (m < 1) throw std::domain_error("obstruction.c_from_lowest_norm: requires m >= 1");
  const double md = static_cast<double>(m);
  return md * (std::log(2.0 * md) - 2.0) + std::log(md) + std::log(md + 1.0) -
         moments::detail::log_gamma_diff_int(m + 1, 2.0 * md, md);
}

inline double c_from_lowest_norm(int m) { return std::exp(log_c_from_lowest_norm(m)); }

/// log of the candidate read off the gap-two monomial z1^{m+2}:
///   C = (2m/e^2)^m 4 m^3 (m+3) /
///       ((m+2)(Gamma(m+4, 2m) - 3m Gamma(m+3, 2m) + 2m^2 Gamma(m+2, 2m))).
inline double log_c_from_gap_norm(int m) {
  if (m < 1) throw std::domain_error("obstruction.c_from_gap_norm: requires m >= 1");
  const double md = static_cast<double>(m);
  const double b = 2.0 * md;
  std::vector<std::pair<double, int>> terms = {
      {sf::log_gamma_upper_int(m + 3, b), +1},
      {std::log(3.0 * md) + sf::log_gamma_upper_int(m + 2, b), -1},
      {std::log(2.0 * md * md) + sf::log_gamma_upper_int(m + 1, b), +1},
  };
  const auto combo = moments::detail::signed_log_sum(terms);
  if (combo.sign <= 0)
    throw singularity_error("obstruction.c_from_gap_norm: Gamma combination lost positivity");
  return md * (std::log(2.0 * md) - 2.0) + std::log(4.0) + 3.0 * std::log(md) +
         std::log(md + 3.0) - std::log(md + 2.0) - combo.log_abs;
}

inline double c_from_gap_norm(int m) { return std::exp(log_c_from_gap_norm(m)); }

namespace detail {

// Scaled denominators: gamma_k = Gamma(x+k, 2x) e^{2x} (2x)^{-(x+1)} keeps
// every intermediate O(x^2) for any x, so the two candidate terms can be
// differenced long after the raw Gammas overflow.  The common factor
// e^{-2x} (2x)^{x+1} is restored at the end and may underflow to zero; that is
// the honest double value of f there.
inline double f_scaled(double x) {
  const double b = 2.0 * x;
  const double base = b - (x + 1.0) * std::log(b);
  double g[5];
  for (int k = 1; k <= 4; ++k) g[k] = std::exp(sf::log_gamma_upper(x + k, b) + base);

  const double d1 = g[2] - x * g[1];
  const double d2 = g[4] - 3.0 * x * g[3] + 2.0 * x * x * g[2];
  if (!(d1 > 1e-14 * (g[2] + x * g[1])))
    throw singularity_error("obstruction.f_of_x: first denominator vanished");
  if (!(d2 > 1e-14 * (g[4] + 3.0 * x * g[3] + 2.0 * x * x * g[2])))
    throw singularity_error("obstruction.f_of_x: second denominator vanished");

  const double bracket = x * (x + 1.0) / d1 - 4.0 * x * x * x * (x + 3.0) / ((x + 2.0) * d2);
  return std::exp(base) * bracket;
}

inline double f_plain(double x) {
  double g[5];
  for (int k = 1; k <= 4; ++k) g[k] = sf::gamma_upper(x + k, 2.0 * x);
  const double d1 = g[2] - x * g[1];
  const double d2 = g[4] - 3.0 * x * g[3] + 2.0 * x * x * g[2];
  if (!(std::fabs(d1) > 1e-300) || !(d1 > 0.0))
    throw singularity_error("obstruction.f_of_x: first denominator vanished");
  if (!(std::fabs(d2) > 1e-300) || !(d2 > 0.0))
    throw singularity_error("obstruction.f_of_x: second denominator vanished");
  return x * (x + 1.0) / d1 - 4.0 * x * x * x * (x + 3.0) / ((x + 2.0) * d2);
}

}  // namespace detail

/// The scalar obstruction function
///   f(x) = x(x+1) / (Gamma(x+2,2x) - x Gamma(x+1,2x))
///        - 4x^3(x+3) / ((x+2)(Gamma(x+4,2x) - 3x Gamma(x+3,2x) + 2x^2 Gamma(x+2,2x))),
/// f(0) = 0.  Values at integer x tie the two constant candidates together:
///   f(m) = (e^2/2m)^m (C_lowest(m) - C_gap(m)).
inline double obstruction_function(double x) {
  if (!(x >= 0.0)) throw std::domain_error("obstruction.f_of_x: requires x >= 0");
  if (x == 0.0) return 0.0;
  return x <= 20.0 ? detail::f_plain(x) : detail::f_scaled(x);
}

struct SignChangeBracket {
  double lower = 0.0;
  double upper = 0.0;
};

struct IntegerSample {
  int m = 0;
  double f = 0.0;
};

struct ObstructionReport {
  double x_min = 0.0, x_max = 0.0, step = 0.0;
  std::vector<std::pair<double, double>> samples;  // (x, f); f is NaN where evaluation failed
  std::size_t failed_samples = 0;
  std::vector<SignChangeBracket> sign_changes;
  std::vector<IntegerSample> f_at_integers;
  std::vector<std::pair<int, double>> log_c_lowest;  // (m, log C)
  std::vector<std::pair<int, double>> log_c_gap;
  double f_mid = std::numeric_limits<double>::quiet_NaN();  // f(x_max / 2)
  double f_end = std::numeric_limits<double>::quiet_NaN();  // f(x_max)
};

namespace detail {

inline SignChangeBracket bisect_sign_change(double lo, double hi, double f_lo) {
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    const double fm = obstruction_function(mid);
    if (fm == 0.0) return {mid, mid};
    if ((fm > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

}  // namespace detail

/// Samples f over [x_min, x_max], refines any sign change by bisection to
/// 1e-10 in x, evaluates f and both log-C candidates at every integer level in
/// range, and records the tail checkpoints f(x_max/2), f(x_max).
///
/// A root is only ever reported through a strict sign change f(a) f(b) < 0;
/// small magnitudes alone never count, since f decays to zero.
inline ObstructionReport scan(double x_min, double x_max, double step) {
  if (!(x_min >= 0.0) || !(x_max > x_min))
    throw std::domain_error("obstruction.scan_f: requires 0 <= x_min < x_max");
  if (!(step > 0.0)) throw std::domain_error("obstruction.scan_f: requires step > 0");

  ObstructionReport rep;
  rep.x_min = x_min;
  rep.x_max = x_max;
  rep.step = step;

  const auto n = static_cast<std::size_t>(std::floor((x_max - x_min) / step * (1.0 + 1e-12)));
  std::vector<double> xs;
  xs.reserve(n + 2);
  for (std::size_t i = 0; i <= n; ++i) xs.push_back(x_min + static_cast<double>(i) * step);
  if (xs.back() < x_max - 0.5 * step) xs.push_back(x_max);
  else xs.back() = std::min(xs.back(), x_max);

  rep.samples.assign(xs.size(), {0.0, 0.0});
  std::vector<char> failed(xs.size(), 0);
  moments::detail::parallel_for(xs.size(), [&](std::size_t i) {
    double v;
    try {
      v = obstruction_function(xs[i]);
    } catch (const singularity_error&) {
      v = std::numeric_limits<double>::quiet_NaN();
      failed[i] = 1;
    }
    rep.samples[i] = {xs[i], v};
  });
  for (char c : failed) rep.failed_samples += static_cast<std::size_t>(c);

  for (std::size_t i = 1; i < rep.samples.size(); ++i) {
    const auto [xa, fa] = rep.samples[i - 1];
    const auto [xb, fb] = rep.samples[i];
    if (std::isnan(fa) || std::isnan(fb)) continue;
    if (fa * fb < 0.0) rep.sign_changes.push_back(detail::bisect_sign_change(xa, xb, fa));
  }

  const int m_lo = std::max(1, static_cast<int>(std::ceil(x_min)));
  const int m_hi = static_cast<int>(std::floor(x_max));
  for (int m = m_lo; m <= m_hi; ++m) {
    rep.f_at_integers.push_back({m, obstruction_function(static_cast<double>(m))});
    rep.log_c_lowest.emplace_back(m, log_c_from_lowest_norm(m));
    rep.log_c_gap.emplace_back(m, log_c_from_gap_norm(m));
  }

  rep.f_mid = obstruction_function(0.5 * x_max);
  rep.f_end = obstruction_function(x_max);
  return rep;
}

inline std::string report_csv(const ObstructionReport& rep) {
  std::ostringstream out;
  out << "x,f\n";
  for (const auto& [x, f] : rep.samples)
    out << io::format_double(x) << ',' << io::format_double(f) << '\n';
  return out.str();
}

namespace detail {

inline std::string plot_script(const std::string& stem) {
  std::string s = R"PY(#!/usr/bin/env python3
"""Render y = f(x) from @STEM@.csv (columns x,f)."""
import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
xs, ys = [], []
with open(os.path.join(here, "@STEM@.csv"), newline="") as fh:
    for row in csv.DictReader(fh):
        x, y = float(row["x"]), float(row["f"])
        if y == y:  # skip failed samples
            xs.append(x)
            ys.append(y)

fig, ax = plt.subplots(figsize=(8.0, 4.5))
ax.plot(xs, ys, lw=1.2)
ax.axhline(0.0, color="black", lw=0.6)
ax.set_xlabel("x")
ax.set_ylabel("f(x)")
ax.set_title("obstruction function")
fig.tight_layout()
out = os.path.join(here, "@STEM@.png")
fig.savefig(out, dpi=150)
print("wrote", out)
)PY";
  const std::string key = "@STEM@";
  for (std::size_t pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos))
    s.replace(pos, key.size(), stem);
  return s;
}

}  // namespace detail

/// Writes <stem>.csv (x,f with 17 significant digits) plus a self-contained
/// plot script that reads the CSV by relative path.  Byte-identical output for
/// identical reports.
inline void write_plot_bundle(const ObstructionReport& rep, const std::filesystem::path& dir,
                              const std::string& stem = "figure1") {
  if (rep.samples.empty())
    throw std::invalid_argument("obstruction.emit_plot_bundle: empty report");
  io::atomic_write_text(dir / (stem + ".csv"), report_csv(rep));
  io::atomic_write_text(dir / (stem + "_plot.py"), detail::plot_script(stem));
}

}  // namespace ehbal::obstruction
