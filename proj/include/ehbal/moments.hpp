#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ehbal/eh_geometry.hpp"
#include "ehbal/errors.hpp"
#include "ehbal/io.hpp"
#include "ehbal/quadrature.hpp"
#include "ehbal/special_functions.hpp"

namespace ehbal::moments {

/// Index of the monomial z1^j z2^k at quantization level m.  Sections vanish
/// to order >= m at the origin, so j + k >= m.
struct MonomialIndex {
  int j = 0;
  int k = 0;
  int m = 1;
};

enum class NormMethod : std::uint8_t { ClosedForm, Quadrature };

inline const char* to_string(NormMethod m) {
  return m == NormMethod::ClosedForm ? "closed-form" : "quadrature";
}

namespace detail {

inline void validate(const MonomialIndex& idx, const char* where) {
  if (idx.j < 0 || idx.k < 0)
    throw std::domain_error(std::string(where) + ": requires j, k >= 0");
  if (idx.m < 1) throw std::domain_error(std::string(where) + ": requires m >= 1");
  if (idx.j + idx.k < idx.m)
    throw std::domain_error(std::string(where) + ": requires j + k >= m");
}

// log of the radial integrand  e^{-m t} (1+t)^m r^p,  t = sqrt(r^4 + 1).
inline double log_radial_integrand(double r, int p, int m) {
  if (r <= 0.0) return -std::numeric_limits<double>::infinity();
  if (r > 1e100) return -std::numeric_limits<double>::infinity();
  const double t = std::hypot(r * r, 1.0);
  return static_cast<double>(m) * (std::log1p(t) - t) + static_cast<double>(p) * std::log(r);
}

// log(2 j! k! / (j+k+1)!), the angular coefficient of the norm.
inline double log_angular_coeff(int j, int k) {
  return std::log(2.0) + std::lgamma(j + 1.0) + std::lgamma(k + 1.0) - std::lgamma(j + k + 2.0);
}

// log(Gamma(a+1, b) - c * Gamma(a, b)) for integer a and 0 < c <= a - ...;
// here always c <= a - ... such that the difference is positive with a benign
// ratio (the recurrence gives Gamma(a+1,b) - c Gamma(a,b) =
// (a-c) Gamma(a,b) + b^a e^{-b}).
inline double log_gamma_diff_int(int a, double b, double c) {
  const double l1 = sf::log_gamma_upper_int(a, b);      // Gamma(a+1, b)
  const double l0 = sf::log_gamma_upper_int(a - 1, b);  // Gamma(a, b)
  const double ratio = std::exp(l0 + std::log(c) - l1);
  if (!(ratio < 1.0))
    throw convergence_error("moments.closed_norm: Gamma difference lost positivity");
  return l1 + std::log1p(-ratio);
}

struct SignedLogSum {
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;
  double condition = 1.0;  // sum |terms| / |sum terms|
};

inline SignedLogSum signed_log_sum(const std::vector<std::pair<double, int>>& terms) {
  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& [l, s] : terms) max_log = std::max(max_log, l);
  double acc = 0.0, abs_acc = 0.0;
  for (const auto& [l, s] : terms) {
    const double e = std::exp(l - max_log);
    acc += (s >= 0 ? e : -e);
    abs_acc += e;
  }
  SignedLogSum out;
  if (acc == 0.0) {
    out.sign = 0;
    out.condition = std::numeric_limits<double>::infinity();
    return out;
  }
  out.sign = acc > 0.0 ? 1 : -1;
  out.log_abs = max_log + std::log(std::fabs(acc));
  out.condition = abs_acc / std::fabs(acc);
  return out;
}

inline double log_binomial(int n, int k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

/// log of the radial moment integral
///   I(p, m) = int_0^inf e^{-m sqrt(r^4+1)} (1 + sqrt(r^4+1))^m r^p dr,
/// p = 2 (j+k-m) + 3 >= 3.
///
/// The integrand peaks where t = sqrt(r^4+1) equals 1 + p/(2m); the domain is
/// split there and the tail mapped onto [0,1) by r = r*/(1-s).  Both halves
/// are integrated adaptively on the peak-normalized integrand, so the result
/// is exact log-space up to the quadrature tolerance.
inline double log_radial_integral(int p, int m, double rel_tol = 1e-12) {
  if (m < 1) throw std::domain_error("moments.radial_integral: requires m >= 1");
  if (p < 3)
    throw std::domain_error("moments.radial_integral: requires exponent p >= 3 (j + k >= m)");

  const double t_star = 1.0 + 0.5 * static_cast<double>(p) / static_cast<double>(m);
  const double r_star = std::pow(t_star * t_star - 1.0, 0.25);
  const double log_peak = detail::log_radial_integrand(r_star, p, m);

  auto scaled = [=](double r) {
    const double l = detail::log_radial_integrand(r, p, m) - log_peak;
    return l > -745.0 ? std::exp(l) : 0.0;
  };
  auto tail = [=](double s) {
    const double om = 1.0 - s;
    if (om <= 0.0) return 0.0;
    const double g = scaled(r_star / om);
    if (g == 0.0) return 0.0;
    return g * r_star / (om * om);
  };

  quadrature::QuadratureResult head, rest;
  try {
    head = quadrature::integrate_adaptive(scaled, 0.0, r_star, 0.0, rel_tol);
    rest = quadrature::integrate_adaptive(tail, 0.0, 1.0, 0.0, rel_tol);
  } catch (const convergence_error&) {
    throw convergence_error("moments.radial_integral: adaptive quadrature did not converge");
  }
  return log_peak + std::log(head.value + rest.value);
}

inline double radial_integral(int p, int m, double rel_tol = 1e-12) {
  const double lg = log_radial_integral(p, m, rel_tol);
  if (lg >= 709.78)
    throw std::overflow_error("moments.radial_integral: result exceeds double range");
  return std::exp(lg);
}

/// log ||z1^j z2^k||^2 by the angular coefficient times the radial integral.
inline double log_norm_squared(const MonomialIndex& idx, double rel_tol = 1e-12) {
  detail::validate(idx, "moments.norm_squared");
  const int p = 2 * (idx.j + idx.k - idx.m) + 3;
  return detail::log_angular_coeff(idx.j, idx.k) + log_radial_integral(p, idx.m, rel_tol);
}

inline double norm_squared(const MonomialIndex& idx, double rel_tol = 1e-12) {
  const double lg = log_norm_squared(idx, rel_tol);
  if (lg >= 709.78)
    throw std::overflow_error("moments.norm_squared: result exceeds double range");
  return std::exp(lg);
}

/// log ||z1^m||^2 in closed form:
///   (1/(m^2 (m+1))) (e/m)^m (Gamma(m+2, 2m) - m Gamma(m+1, 2m)).
inline double log_closed_norm_min(int m) {
  if (m < 1) throw std::domain_error("moments.closed_norm_min: requires m >= 1");
  const double md = static_cast<double>(m);
  return -(2.0 * std::log(md) + std::log(md + 1.0)) + md * (1.0 - std::log(md)) +
         detail::log_gamma_diff_int(m + 1, 2.0 * md, md);
}

inline double closed_norm_min(int m) { return std::exp(log_closed_norm_min(m)); }

/// log ||z1^{m+2}||^2 in closed form:
///   (1/(m^4 (m+3))) (e/m)^m
///   (Gamma(m+4, 2m) - 3m Gamma(m+3, 2m) + 2m^2 Gamma(m+2, 2m)).
inline double log_closed_norm_gap2(int m) {
  if (m < 1) throw std::domain_error("moments.closed_norm_gap2: requires m >= 1");
  const double md = static_cast<double>(m);
  const double b = 2.0 * md;
  std::vector<std::pair<double, int>> terms = {
      {sf::log_gamma_upper_int(m + 3, b), +1},
      {std::log(3.0 * md) + sf::log_gamma_upper_int(m + 2, b), -1},
      {std::log(2.0 * md * md) + sf::log_gamma_upper_int(m + 1, b), +1},
  };
  const auto sum = detail::signed_log_sum(terms);
  if (sum.sign <= 0)
    throw convergence_error("moments.closed_norm_gap2: Gamma combination lost positivity");
  return -(4.0 * std::log(md) + std::log(md + 3.0)) + md * (1.0 - std::log(md)) + sum.log_abs;
}

inline double closed_norm_gap2(int m) { return std::exp(log_closed_norm_gap2(m)); }

namespace detail {

// General even-gap closed form.  With q = j+k-m = 2 nu, the substitution
// t = sqrt(r^4+1), s = 1 + t turns the radial integral into
//   (e^m / 2) sum_{i=0}^{nu} C(nu,i) (-2)^{nu-i}
//     m^{-(A_i+1)} (Gamma(A_i+1, 2m) - m Gamma(A_i, 2m)),   A_i = m+nu+i+1.
// Alternating signs make the sum ill-conditioned for large nu; the condition
// number is reported so callers can fall back to quadrature.
inline SignedLogSum log_even_gap_radial_sum(int m, int nu) {
  const double md = static_cast<double>(m);
  const double b = 2.0 * md;
  std::vector<std::pair<double, int>> terms;
  terms.reserve(static_cast<std::size_t>(nu) + 1);
  for (int i = 0; i <= nu; ++i) {
    const int a = m + nu + i + 1;
    const double l = log_binomial(nu, i) + static_cast<double>(nu - i) * std::log(2.0) -
                     (a + 1.0) * std::log(md) + log_gamma_diff_int(a, b, md);
    terms.emplace_back(l, ((nu - i) % 2 == 0) ? +1 : -1);
  }
  auto sum = signed_log_sum(terms);
  if (sum.sign > 0) sum.log_abs += md - std::log(2.0);  // (e^m / 2) prefactor
  return sum;
}

struct EvenGapResult {
  double log_norm;
  double condition;
};

inline EvenGapResult log_closed_norm_even_gap_impl(const MonomialIndex& idx) {
  validate(idx, "moments.closed_norm_even_gap");
  const int gap = idx.j + idx.k - idx.m;
  if (gap % 2 != 0)
    throw std::domain_error("moments.closed_norm_even_gap: requires even j + k - m");
  const auto sum = log_even_gap_radial_sum(idx.m, gap / 2);
  if (sum.sign <= 0)
    throw convergence_error(
        "moments.closed_norm_even_gap: alternating sum lost positivity; use quadrature");
  return {log_angular_coeff(idx.j, idx.k) + sum.log_abs, sum.condition};
}

}  // namespace detail

/// log ||z1^j z2^k||^2 through the finite Gamma combination available when
/// j + k - m is even.  Reduces to log_closed_norm_min at gap 0 and
/// log_closed_norm_gap2 at gap 2.
inline double log_closed_norm_even_gap(const MonomialIndex& idx) {
  return detail::log_closed_norm_even_gap_impl(idx).log_norm;
}

inline double closed_norm_even_gap(const MonomialIndex& idx) {
  const double lg = log_closed_norm_even_gap(idx);
  if (lg >= 709.78)
    throw std::overflow_error("moments.closed_norm_even_gap: result exceeds double range");
  return std::exp(lg);
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  if (count < 16 || hw == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t n_tasks = std::min(hw, count);
  std::vector<std::future<void>> tasks;
  tasks.reserve(n_tasks);
  for (std::size_t t = 0; t < n_tasks; ++t) {
    tasks.push_back(std::async(std::launch::async, [t, n_tasks, count, &fn] {
      for (std::size_t i = t; i < count; i += n_tasks) fn(i);
    }));
  }
  for (auto& task : tasks) task.get();  // rethrows worker exceptions
}

}  // namespace detail

/// Table of log ||z1^j z2^k||^2 for all j + k in [m, dmax].
///
/// Closed forms are used on even gaps while well conditioned, adaptive
/// quadrature otherwise; the method tag records the route taken per entry.
/// Construction and extension are exclusive phases; the finished table is
/// immutable and safe to share across threads.
class MonomialNormTable {
 public:
  struct Row {
    int j, k;
    double log_norm;
    NormMethod method;
  };

  MonomialNormTable(int m, int dmax) : m_(m), dmax_(m - 1) {
    if (m < 1) throw std::domain_error("moments.build_table: requires m >= 1");
    if (dmax < m) throw std::domain_error("moments.build_table: requires dmax >= m");
    extend_to(dmax);
  }

  int level() const { return m_; }
  int max_degree() const { return dmax_; }
  std::size_t size() const { return logn_.size(); }

  double log_norm(int j, int k) const { return logn_[index(j, k)]; }
  NormMethod method(int j, int k) const { return method_[index(j, k)]; }

  /// Grows the table to cover total degrees up to dmax.  Not thread-safe with
  /// concurrent readers; extend first, share after.
  void extend_to(int dmax) {
    while (dmax_ < dmax) append_degree(dmax_ + 1);
  }

  std::vector<Row> rows() const {
    std::vector<Row> out;
    out.reserve(size());
    for (int d = m_; d <= dmax_; ++d)
      for (int j = 0; j <= d; ++j)
        out.push_back({j, d - j, logn_[index(j, d - j)], method_[index(j, d - j)]});
    return out;
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "j,k,m,logN,method\n";
    for (const auto& r : rows())
      out << r.j << ',' << r.k << ',' << m_ << ',' << io::format_double(r.log_norm) << ','
          << to_string(r.method) << '\n';
    return out.str();
  }

  static MonomialNormTable from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "j,k,m,logN,method")
      throw std::invalid_argument("moments.MonomialNormTable: bad CSV header");
    struct Parsed {
      int j, k;
      double logn;
      NormMethod method;
    };
    std::vector<Parsed> parsed;
    int m = -1;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto fields = io::split_csv_line(line);
      if (fields.size() != 5)
        throw std::invalid_argument("moments.MonomialNormTable: bad CSV row: " + line);
      Parsed row{std::stoi(fields[0]), std::stoi(fields[1]), std::stod(fields[3]),
                 fields[4] == "closed-form" ? NormMethod::ClosedForm : NormMethod::Quadrature};
      const int row_m = std::stoi(fields[2]);
      if (m == -1) m = row_m;
      if (row_m != m)
        throw std::invalid_argument("moments.MonomialNormTable: mixed levels in CSV");
      parsed.push_back(row);
    }
    if (parsed.empty()) throw std::invalid_argument("moments.MonomialNormTable: empty CSV");
    int dmax = m;
    for (const auto& r : parsed) dmax = std::max(dmax, r.j + r.k);
    MonomialNormTable table(Tag{}, m, dmax);
    std::vector<bool> seen(table.logn_.size(), false);
    for (const auto& r : parsed) {
      const std::size_t i = table.index(r.j, r.k);
      table.logn_[i] = r.logn;
      table.method_[i] = r.method;
      seen[i] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (!seen[i])
        throw std::invalid_argument("moments.MonomialNormTable: CSV does not cover every (j,k)");
    return table;
  }

  /// Table with externally supplied entries (complete degrees m..dmax).
  static MonomialNormTable from_entries(int m, int dmax, const std::vector<Row>& entries) {
    MonomialNormTable table(Tag{}, m, dmax);
    std::vector<bool> seen(table.logn_.size(), false);
    for (const auto& r : entries) {
      const std::size_t i = table.index(r.j, r.k);
      table.logn_[i] = r.log_norm;
      table.method_[i] = r.method;
      seen[i] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
      if (!seen[i])
        throw std::invalid_argument("moments.MonomialNormTable: entries do not cover every (j,k)");
    return table;
  }

 private:
  struct Tag {};

  MonomialNormTable(Tag, int m, int dmax) : m_(m), dmax_(dmax) {
    if (m < 1 || dmax < m) throw std::domain_error("moments.MonomialNormTable: bad shape");
    const std::size_t n = count_entries(m, dmax);
    logn_.assign(n, 0.0);
    method_.assign(n, NormMethod::Quadrature);
  }

  // degrees m..dmax, degree d holding d+1 entries: sum_{e=m}^{dmax} (e+1)
  static std::size_t count_entries(int m, int dmax) {
    return static_cast<std::size_t>(
        (static_cast<long long>(dmax + 1) * (dmax + 2) - static_cast<long long>(m) * (m + 1)) /
        2);
  }

  std::size_t index(int j, int k) const {
    const int d = j + k;
    if (j < 0 || k < 0 || d < m_ || d > dmax_)
      throw std::out_of_range("moments.MonomialNormTable: (j,k) outside table");
    const long long base =
        (static_cast<long long>(d) * (d + 1) - static_cast<long long>(m_) * (m_ + 1)) / 2;
    return static_cast<std::size_t>(base + j);
  }

  void append_degree(int d) {
    const std::size_t row_begin = logn_.size();
    logn_.resize(row_begin + static_cast<std::size_t>(d) + 1);
    method_.resize(row_begin + static_cast<std::size_t>(d) + 1);
    dmax_ = d;

    const int half = d / 2;
    detail::parallel_for(static_cast<std::size_t>(half) + 1, [&](std::size_t ji) {
      const int j = static_cast<int>(ji);
      const int k = d - j;
      const MonomialIndex idx{j, k, m_};
      double value;
      NormMethod method;
      if ((d - m_) % 2 == 0) {
        const auto closed = detail::log_closed_norm_even_gap_impl(idx);
        if (closed.condition <= 1e6) {
          value = closed.log_norm;
          method = NormMethod::ClosedForm;
        } else {
          value = log_norm_squared(idx);
          method = NormMethod::Quadrature;
        }
      } else {
        value = log_norm_squared(idx);
        method = NormMethod::Quadrature;
      }
      logn_[row_begin + ji] = value;
      method_[row_begin + ji] = method;
      // exchange symmetry: ||z1^j z2^k|| == ||z1^k z2^j||
      logn_[row_begin + static_cast<std::size_t>(k)] = value;
      method_[row_begin + static_cast<std::size_t>(k)] = method;
    });
  }

  int m_;
  int dmax_;
  std::vector<double> logn_;
  std::vector<NormMethod> method_;
};

inline MonomialNormTable build_table(int m, int dmax) { return MonomialNormTable(m, dmax); }

/// Monte-Carlo estimate of the Hermitian inner product of two distinct
/// monomials; the exact value is zero by the angular phase integral.
struct McPairEstimate {
  int j1, k1, j2, k2;
  double real_mean, imag_mean;
  double real_se, imag_se;
  std::size_t samples;

  bool zero_within(double n_sigma) const {
    return std::fabs(real_mean) <= n_sigma * real_se && std::fabs(imag_mean) <= n_sigma * imag_se;
  }
};

/// Samples n_pairs random distinct monomial pairs with m <= j+k <= max_degree
/// and estimates their inner products with n_samples importance-sampled draws
/// (rho_i^2 exponential, phases uniform).
inline std::vector<McPairEstimate> mc_orthogonality(int m, int n_pairs, std::size_t n_samples,
                                                    std::uint64_t seed, int max_degree = -1) {
  if (m < 1) throw std::domain_error("moments.mc_orthogonality: requires m >= 1");
  if (max_degree < m) max_degree = m + 4;

  std::vector<std::pair<int, int>> monomials;
  for (int d = m; d <= max_degree; ++d)
    for (int j = 0; j <= d; ++j) monomials.emplace_back(j, d - j);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, monomials.size() - 1);
  std::exponential_distribution<double> radial(1.0);  // rate beta = 1 < 2m
  std::uniform_real_distribution<double> angle(0.0, 2.0 * 3.14159265358979323846);

  std::vector<McPairEstimate> out;
  out.reserve(static_cast<std::size_t>(n_pairs));
  for (int p = 0; p < n_pairs; ++p) {
    auto a = monomials[pick(rng)];
    auto b = monomials[pick(rng)];
    while (a == b) b = monomials[pick(rng)];

    const double pow_u = 0.5 * static_cast<double>(a.first + b.first);
    const double pow_v = 0.5 * static_cast<double>(a.second + b.second);
    const double dj = static_cast<double>(a.first - b.first);
    const double dk = static_cast<double>(a.second - b.second);

    double mean_re = 0.0, mean_im = 0.0, m2_re = 0.0, m2_im = 0.0;
    for (std::size_t n = 1; n <= n_samples; ++n) {
      const double u = radial(rng);
      const double v = radial(rng);
      const double th1 = angle(rng);
      const double th2 = angle(rng);
      const double s = u + v;
      // integrand / sampling density, with the 1/pi^2 measure absorbed by the
      // angular averages
      double mag = 0.0;
      if (u > 0.0 && v > 0.0) {
        const double log_mag =
            geom::log_weight_radial(m, s) + s + pow_u * std::log(u) + pow_v * std::log(v);
        mag = log_mag > -745.0 ? std::exp(log_mag) : 0.0;
      }
      const double phase = dj * th1 + dk * th2;
      const double re = mag * std::cos(phase);
      const double im = mag * std::sin(phase);
      const double d_re = re - mean_re;
      mean_re += d_re / static_cast<double>(n);
      m2_re += d_re * (re - mean_re);
      const double d_im = im - mean_im;
      mean_im += d_im / static_cast<double>(n);
      m2_im += d_im * (im - mean_im);
    }
    const double nd = static_cast<double>(n_samples);
    out.push_back({a.first, a.second, b.first, b.second, mean_re, mean_im,
                   std::sqrt(m2_re / (nd - 1.0) / nd), std::sqrt(m2_im / (nd - 1.0) / nd),
                   n_samples});
  }
  return out;
}

}  // namespace ehbal::moments
