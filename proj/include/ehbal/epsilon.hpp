#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ehbal/eh_geometry.hpp"
#include "ehbal/errors.hpp"
#include "ehbal/io.hpp"
#include "ehbal/moments.hpp"

namespace ehbal::epsilon {

struct EpsilonValue {
  double value = 0.0;
  double tail_estimate = 0.0;  // relative bound on the dropped tail
  int degree_used = 0;
};

namespace detail {

inline void validate_point(double x, double y, const char* where) {
  if (!(x >= 0.0) || !(y >= 0.0))
    throw std::domain_error(std::string(where) + ": requires x, y >= 0");
  if (x == 0.0 && y == 0.0)
    throw std::domain_error(std::string(where) + ": (0,0) excluded; take the axis limit instead");
}

// log of sum_{j+k=d} x^j y^k / N_{j,k,m} for one total degree.
inline double log_degree_sum(const moments::MonomialNormTable& table, int d, double log_x,
                             double log_y) {
  const bool no_x = std::isinf(log_x);  // x == 0
  const bool no_y = std::isinf(log_y);
  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(d) + 1);
  for (int j = 0; j <= d; ++j) {
    const int k = d - j;
    if ((j > 0 && no_x) || (k > 0 && no_y)) continue;
    const double l = (j > 0 ? j * log_x : 0.0) + (k > 0 ? k * log_y : 0.0) - table.log_norm(j, k);
    logs.push_back(l);
    max_log = std::max(max_log, l);
  }
  if (logs.empty() || std::isinf(max_log)) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - max_log);
  return max_log + std::log(acc);
}

struct SeriesAccumulation {
  double log_total;
  double tail_estimate;
  int degree_used;
};

// Sums the monomial series degree by degree, extending the table on demand,
// until the geometric tail bound certifies a relative remainder below tol.
// After the per-degree sums peak, five consecutive ratios below 1/2 are
// required before the bound is trusted.
inline SeriesAccumulation accumulate_series(int m, double x, double y, double tol,
                                            moments::MonomialNormTable& table, int degree_budget) {
  const double log_x = std::log(x);  // -inf at 0 is handled in log_degree_sum
  const double log_y = std::log(y);

  double run_max = -std::numeric_limits<double>::infinity();
  double run_sum = 0.0;
  auto add_to_total = [&](double l) {
    if (std::isinf(l) && l < 0) return;
    if (l <= run_max) {
      run_sum += std::exp(l - run_max);
    } else {
      run_sum = run_sum * std::exp(run_max - l) + 1.0;
      run_max = l;
    }
  };

  double prev_log = -std::numeric_limits<double>::infinity();
  double peak_log = -std::numeric_limits<double>::infinity();
  int consecutive = 0;
  double rho_window = 0.0;

  for (int d = m; d <= degree_budget; ++d) {
    if (d > table.max_degree()) table.extend_to(d);
    const double ld = log_degree_sum(table, d, log_x, log_y);
    add_to_total(ld);

    if (ld > peak_log) {
      peak_log = ld;
      consecutive = 0;
      rho_window = 0.0;
    } else if (!std::isinf(prev_log)) {
      const double rho = std::exp(ld - prev_log);
      if (rho < 0.5) {
        ++consecutive;
        rho_window = std::max(rho_window, rho);
        if (consecutive >= 5) {
          const double log_total = run_max + std::log(run_sum);
          const double log_tail = ld + std::log(rho_window / (1.0 - rho_window));
          const double rel_tail = std::exp(log_tail - log_total);
          if (rel_tail < tol) return {log_total, rel_tail, d};
        }
      } else {
        consecutive = 0;
        rho_window = 0.0;
      }
    }
    prev_log = ld;
  }
  throw convergence_error(
      "epsilon.epsilon_eval: tail not certified within the degree budget of " +
      std::to_string(degree_budget));
}

// Fixed truncation degree, no certification; used by finite-difference
// stencils so every evaluation shares the same (smooth) truncated sum.
inline double log_epsilon_fixed_degree(int m, double x, double y,
                                       const moments::MonomialNormTable& table, int degree) {
  const double log_x = std::log(x);
  const double log_y = std::log(y);
  double run_max = -std::numeric_limits<double>::infinity();
  double run_sum = 0.0;
  for (int d = m; d <= degree; ++d) {
    const double ld = log_degree_sum(table, d, log_x, log_y);
    if (std::isinf(ld) && ld < 0) continue;
    if (ld <= run_max) {
      run_sum += std::exp(ld - run_max);
    } else {
      run_sum = run_sum * std::exp(run_max - ld) + 1.0;
      run_max = ld;
    }
  }
  return geom::log_weight_radial(m, x + y) + run_max + std::log(run_sum);
}

}  // namespace detail

inline int default_degree_budget(int m) { return m + 200; }

/// Density of the coherent-state sum at (x, y) = (|z1|^2, |z2|^2):
///   epsilon_m = w_m(z) sum_{j+k >= m} x^j y^k / ||z1^j z2^k||^2,
/// truncated once a geometric bound certifies the dropped tail below tol
/// (relative).  Extends the norm table on demand up to the degree budget.
inline EpsilonValue epsilon_eval(int m, double x, double y, double tol,
                                 moments::MonomialNormTable& table, int degree_budget = -1) {
  detail::validate_point(x, y, "epsilon.epsilon_eval");
  if (m < 1) throw std::domain_error("epsilon.epsilon_eval: requires m >= 1");
  if (table.level() != m)
    throw std::invalid_argument("epsilon.epsilon_eval: table level does not match m");
  if (!(tol > 0.0)) throw std::domain_error("epsilon.epsilon_eval: requires tol > 0");
  if (degree_budget < 0) degree_budget = default_degree_budget(m);

  const auto acc = detail::accumulate_series(m, x, y, tol, table, degree_budget);
  const double log_eps = geom::log_weight_radial(m, x + y) + acc.log_total;
  return {std::exp(log_eps), acc.tail_estimate, acc.degree_used};
}

/// Complex-point wrapper: the value depends on the moduli only.
inline EpsilonValue epsilon_at(int m, std::complex<double> z1, std::complex<double> z2, double tol,
                               moments::MonomialNormTable& table, int degree_budget = -1) {
  return epsilon_eval(m, std::norm(z1), std::norm(z2), tol, table, degree_budget);
}

struct EpsilonSample {
  double x, y;
  double value;
  double tail_estimate;
  int degree_used;
};

struct EpsilonProfile {
  int m = 1;
  double tol = 0.0;
  std::vector<EpsilonSample> samples;

  std::string to_csv() const {
    std::ostringstream out;
    out << "m,x,y,epsilon,tail_estimate,Dmax\n";
    for (const auto& s : samples)
      out << m << ',' << io::format_double(s.x) << ',' << io::format_double(s.y) << ','
          << io::format_double(s.value) << ',' << io::format_double(s.tail_estimate) << ','
          << s.degree_used << '\n';
    return out.str();
  }
};

inline EpsilonProfile profile(int m, const std::vector<std::pair<double, double>>& grid,
                              double tol, moments::MonomialNormTable& table,
                              int degree_budget = -1) {
  EpsilonProfile out;
  out.m = m;
  out.tol = tol;
  out.samples.reserve(grid.size());
  for (const auto& [x, y] : grid) {
    const auto v = epsilon_eval(m, x, y, tol, table, degree_budget);
    out.samples.push_back({x, y, v.value, v.tail_estimate, v.degree_used});
  }
  return out;
}

/// Constancy report over a grid.  The metric passes as balanced only when the
/// observed relative variation is within 10x the worst certified tail bound,
/// i.e. indistinguishable from truncation error.
struct BalancedReport {
  double min_value = 0.0;
  double max_value = 0.0;
  double relative_variation = 0.0;
  double max_tail_estimate = 0.0;
  std::size_t grid_size = 0;
  bool balanced = false;
};

inline BalancedReport balanced_test(int m, const std::vector<std::pair<double, double>>& grid,
                                    double tol, moments::MonomialNormTable& table,
                                    int degree_budget = -1) {
  if (grid.empty()) throw std::invalid_argument("epsilon.balanced_test: empty grid");
  BalancedReport rep;
  rep.grid_size = grid.size();
  rep.min_value = std::numeric_limits<double>::infinity();
  rep.max_value = -std::numeric_limits<double>::infinity();
  for (const auto& [x, y] : grid) {
    const auto v = epsilon_eval(m, x, y, tol, table, degree_budget);
    rep.min_value = std::min(rep.min_value, v.value);
    rep.max_value = std::max(rep.max_value, v.value);
    rep.max_tail_estimate = std::max(rep.max_tail_estimate, v.tail_estimate);
  }
  rep.relative_variation = (rep.max_value - rep.min_value) / rep.min_value;
  rep.balanced = rep.relative_variation <= 10.0 * rep.max_tail_estimate;
  return rep;
}

/// Mixed complex Hessian of log of an arbitrary positive density eps(x, y);
/// test seam for discrepancy_form.
template <typename F>
geom::HermitianMatrix2 discrepancy_form_of(F&& eps_fn, double x, double y, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("epsilon.discrepancy_form: requires step h > 0");
  detail::validate_point(x, y, "epsilon.discrepancy_form");
  auto log_eps = [&](std::complex<double> z1, std::complex<double> z2) {
    return std::log(eps_fn(std::norm(z1), std::norm(z2)));
  };
  return geom::complex_hessian(log_eps, std::sqrt(x), std::sqrt(y), h, /*richardson=*/false);
}

/// Coefficient matrix of dd-bar log epsilon_m at (x, y), the density measuring
/// how far m times the metric is from projectively induced.  Identically zero
/// when epsilon is constant.  All stencil evaluations share one truncation
/// degree so the differenced function is smooth.
inline geom::HermitianMatrix2 discrepancy_form(int m, double x, double y, double h,
                                               moments::MonomialNormTable& table,
                                               double tol = 1e-10, int degree_budget = -1) {
  if (!(h > 0.0)) throw std::invalid_argument("epsilon.discrepancy_form: requires step h > 0");
  detail::validate_point(x, y, "epsilon.discrepancy_form");
  const auto center = epsilon_eval(m, x, y, tol, table, degree_budget);
  const int degree = std::min(center.degree_used + 8,
                              degree_budget < 0 ? default_degree_budget(m) : degree_budget);
  table.extend_to(degree);
  const auto& fixed = table;
  auto log_eps = [&](std::complex<double> z1, std::complex<double> z2) {
    return detail::log_epsilon_fixed_degree(m, std::norm(z1), std::norm(z2), fixed, degree);
  };
  return geom::complex_hessian(log_eps, std::sqrt(x), std::sqrt(y), h, /*richardson=*/false);
}

}  // namespace ehbal::epsilon
