#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ehbal::series {

/// Truncated univariate power series sum c_i u^i, i = 0..D.  Arithmetic never
/// reads beyond order D.  Immutable use after construction is thread-safe.
class TruncatedSeries {
 public:
  explicit TruncatedSeries(int order) : c_(static_cast<std::size_t>(order) + 1, 0.0) {
    if (order < 0) throw std::invalid_argument("series.TruncatedSeries: order must be >= 0");
  }

  static TruncatedSeries from_coefficients(std::vector<double> coeffs) {
    if (coeffs.empty())
      throw std::invalid_argument("series.TruncatedSeries: needs at least the constant term");
    TruncatedSeries s(static_cast<int>(coeffs.size()) - 1);
    s.c_ = std::move(coeffs);
    return s;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& coefficients() const { return c_; }

  /// Compensated Horner evaluation.
  double evaluate(double u) const {
    double s = c_.back();
    double comp = 0.0;
    for (int i = order() - 1; i >= 0; --i) {
      const double p = s * u;
      const double pe = std::fma(s, u, -p);
      const double t = p + c_[static_cast<std::size_t>(i)];
      const double se = (std::fabs(p) >= std::fabs(c_[static_cast<std::size_t>(i)]))
                            ? (p - t) + c_[static_cast<std::size_t>(i)]
                            : (c_[static_cast<std::size_t>(i)] - t) + p;
      s = t;
      comp = comp * u + (pe + se);
    }
    return s + comp;
  }

 private:
  std::vector<double> c_;
};

namespace detail {
inline void require_same_order(const TruncatedSeries& a, const TruncatedSeries& b,
                               const char* op) {
  if (a.order() != b.order())
    throw std::invalid_argument(std::string("series.") + op + ": truncation orders differ");
}
}  // namespace detail

inline TruncatedSeries add(const TruncatedSeries& a, const TruncatedSeries& b) {
  detail::require_same_order(a, b, "add");
  TruncatedSeries r(a.order());
  for (int i = 0; i <= a.order(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline TruncatedSeries scale(const TruncatedSeries& a, double s) {
  TruncatedSeries r(a.order());
  for (int i = 0; i <= a.order(); ++i) r[i] = s * a[i];
  return r;
}

inline TruncatedSeries mul(const TruncatedSeries& a, const TruncatedSeries& b) {
  detail::require_same_order(a, b, "mul");
  TruncatedSeries r(a.order());
  for (int n = 0; n <= a.order(); ++n) {
    double acc = 0.0;
    for (int k = 0; k <= n; ++k) acc += a[k] * b[n - k];
    r[n] = acc;
  }
  return r;
}

inline TruncatedSeries power(const TruncatedSeries& a, unsigned n) {
  TruncatedSeries result(a.order());
  result[0] = 1.0;
  TruncatedSeries base = a;
  while (n > 0) {
    if (n & 1u) result = mul(result, base);
    n >>= 1u;
    if (n > 0) base = mul(base, base);
  }
  return result;
}

/// exp of a series; a nonzero constant term is factored out as e^{c0}.
inline TruncatedSeries exp(const TruncatedSeries& a) {
  const int d = a.order();
  TruncatedSeries r(d);
  r[0] = 1.0;
  for (int n = 1; n <= d; ++n) {
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) acc += static_cast<double>(k) * a[k] * r[n - k];
    r[n] = acc / static_cast<double>(n);
  }
  return scale(r, std::exp(a[0]));
}

/// sqrt of a series; requires a positive constant term.
inline TruncatedSeries sqrt(const TruncatedSeries& a) {
  if (a[0] == 0.0)
    throw std::domain_error("series.sqrt: zero constant term");
  if (a[0] < 0.0) throw std::domain_error("series.sqrt: negative constant term");
  const int d = a.order();
  TruncatedSeries r(d);
  r[0] = std::sqrt(a[0]);
  for (int n = 1; n <= d; ++n) {
    double acc = a[n];
    for (int k = 1; k < n; ++k) acc -= r[k] * r[n - k];
    r[n] = acc / (2.0 * r[0]);
  }
  return r;
}

/// 1 / series; requires a nonzero constant term.
inline TruncatedSeries reciprocal(const TruncatedSeries& a) {
  if (a[0] == 0.0)
    throw std::domain_error("series.reciprocal: zero constant term");
  const int d = a.order();
  TruncatedSeries r(d);
  r[0] = 1.0 / a[0];
  for (int n = 1; n <= d; ++n) {
    double acc = 0.0;
    for (int k = 1; k <= n; ++k) acc += a[k] * r[n - k];
    r[n] = -acc * r[0];
  }
  return r;
}

/// Coefficients of the radial amplitude
///   A(u) = e^{sqrt(1+u)} / (1 + sqrt(1+u)),
/// the factor with e^{Phi} = |z|^2 A(|z|^4).  A(0) = e/2.
inline TruncatedSeries expand_amplitude(int order) {
  TruncatedSeries one_plus_u(order);
  one_plus_u[0] = 1.0;
  if (order >= 1) one_plus_u[1] = 1.0;
  const TruncatedSeries root = sqrt(one_plus_u);
  TruncatedSeries denom = root;
  denom[0] += 1.0;
  return mul(exp(root), reciprocal(denom));
}

/// Coefficients of e^{m Phi} distributed over monomials x^a y^b in
/// x = |z1|^2, y = |z2|^2.  Total degrees run from m to the requested maximum;
/// odd-degree slices vanish beyond degree m because the amplitude has only
/// even powers.
class BidegreeExpansion {
 public:
  BidegreeExpansion(int m, int max_total_degree, std::vector<std::vector<double>> slices)
      : m_(m), dmax_(max_total_degree), slices_(std::move(slices)) {}

  int level() const { return m_; }
  int min_total_degree() const { return m_; }
  int max_total_degree() const { return dmax_; }

  /// Coefficient of x^a y^b; zero outside the stored degree range.
  double coefficient(int a, int b) const {
    if (a < 0 || b < 0) return 0.0;
    const int d = a + b;
    if (d < m_ || d > dmax_) return 0.0;
    return slices_[static_cast<std::size_t>(d - m_)][static_cast<std::size_t>(b)];
  }

  double evaluate(double x, double y) const {
    double total = 0.0;
    for (int d = dmax_; d >= m_; --d) {
      const auto& row = slices_[static_cast<std::size_t>(d - m_)];
      double s = 0.0;
      for (int b = 0; b <= d; ++b)
        s += row[static_cast<std::size_t>(b)] * std::pow(x, d - b) * std::pow(y, b);
      total += s;
    }
    return total;
  }

 private:
  int m_;
  int dmax_;
  std::vector<std::vector<double>> slices_;  // slices_[d - m][b], b = 0..d
};

/// Expand e^{m Phi} = (x+y)^m A((x+y)^2)^m to max total degree dtot >= m.
inline BidegreeExpansion expand_exp_m_phi(int m, int dtot) {
  if (m < 1) throw std::domain_error("series.expand_exp_m_phi: requires m >= 1");
  if (dtot < m) throw std::domain_error("series.expand_exp_m_phi: requires dtot >= m");

  const int t_order = dtot - m;
  const TruncatedSeries amp = expand_amplitude(t_order);
  TruncatedSeries amp_t2(t_order);  // A(t^2) as a series in t
  for (int i = 0; 2 * i <= t_order; ++i) amp_t2[2 * i] = amp[i];
  const TruncatedSeries b = power(amp_t2, static_cast<unsigned>(m));

  // Pascal rows stay bitwise symmetric, so coefficient(a,b) == coefficient(b,a)
  // exactly.
  std::vector<std::vector<double>> pascal(static_cast<std::size_t>(dtot) + 1);
  pascal[0] = {1.0};
  for (int n = 1; n <= dtot; ++n) {
    auto& row = pascal[static_cast<std::size_t>(n)];
    const auto& prev = pascal[static_cast<std::size_t>(n - 1)];
    row.assign(static_cast<std::size_t>(n) + 1, 0.0);
    row[0] = row[static_cast<std::size_t>(n)] = 1.0;
    for (int j = 1; j < n; ++j)
      row[static_cast<std::size_t>(j)] =
          prev[static_cast<std::size_t>(j - 1)] + prev[static_cast<std::size_t>(j)];
  }

  std::vector<std::vector<double>> slices;
  slices.reserve(static_cast<std::size_t>(t_order) + 1);
  for (int d = 0; d <= t_order; ++d) {
    const int total = m + d;
    std::vector<double> row(static_cast<std::size_t>(total) + 1, 0.0);
    for (int bdeg = 0; bdeg <= total; ++bdeg)
      row[static_cast<std::size_t>(bdeg)] =
          b[d] * pascal[static_cast<std::size_t>(total)][static_cast<std::size_t>(bdeg)];
    slices.push_back(std::move(row));
  }
  return BidegreeExpansion(m, dtot, std::move(slices));
}

}  // namespace ehbal::series
