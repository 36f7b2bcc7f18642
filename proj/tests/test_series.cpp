#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "ehbal/eh_geometry.hpp"
#include "ehbal/series.hpp"

using namespace ehbal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

series::TruncatedSeries random_series(std::mt19937_64& rng, int order, double lo, double hi) {
  std::uniform_real_distribution<double> coeff(lo, hi);
  series::TruncatedSeries s(order);
  for (int i = 0; i <= order; ++i) s[i] = coeff(rng);
  return s;
}

// Taylor coefficients of the amplitude by the circle method: values of the
// function on a complex circle of radius rho, discrete Fourier transformed.
// Entirely independent of the series-arithmetic path.
std::vector<double> amplitude_coeffs_circle_oracle(int order, double rho = 0.5, int samples = 128) {
  std::vector<double> out(static_cast<std::size_t>(order) + 1);
  for (int n = 0; n <= order; ++n) {
    std::complex<double> acc = 0.0;
    for (int k = 0; k < samples; ++k) {
      const double th = 2.0 * 3.14159265358979323846 * k / samples;
      const std::complex<double> u = std::polar(rho, th);
      const std::complex<double> root = std::sqrt(1.0 + u);
      const std::complex<double> a = std::exp(root) / (1.0 + root);
      acc += a * std::polar(1.0, -n * th);
    }
    out[static_cast<std::size_t>(n)] = (acc / static_cast<double>(samples)).real() /
                                       std::pow(rho, n);
  }
  return out;
}

}  // namespace

TEST_CASE("series arithmetic basics") {
  series::TruncatedSeries zero(6);
  const auto e0 = series::exp(zero);
  CHECK(e0[0] == 1.0);
  for (int i = 1; i <= 6; ++i) CHECK(e0[i] == 0.0);

  series::TruncatedSeries one_plus_u(6);
  one_plus_u[0] = 1.0;
  one_plus_u[1] = 1.0;
  const auto root = series::sqrt(one_plus_u);
  CHECK_THAT(root[0], WithinAbs(1.0, 1e-15));
  CHECK_THAT(root[1], WithinAbs(0.5, 1e-15));
  CHECK_THAT(root[2], WithinAbs(-0.125, 1e-15));
  CHECK_THAT(root[3], WithinAbs(0.0625, 1e-15));
  CHECK_THAT(root[4], WithinAbs(-5.0 / 128.0, 1e-15));

  auto denom = root;
  denom[0] += 1.0;  // 1 + sqrt(1+u)
  const auto recip = series::reciprocal(denom);
  CHECK_THAT(recip[0], WithinAbs(0.5, 1e-15));
  CHECK_THAT(recip[1], WithinAbs(-0.125, 1e-15));
  CHECK_THAT(recip[2], WithinAbs(0.0625, 1e-15));
  CHECK_THAT(recip[3], WithinAbs(-5.0 / 128.0, 1e-14));
  const auto identity = series::mul(recip, denom);
  CHECK_THAT(identity[0], WithinAbs(1.0, 1e-15));
  for (int i = 1; i <= 6; ++i) CHECK_THAT(identity[i], WithinAbs(0.0, 1e-15));
}

TEST_CASE("series error paths") {
  series::TruncatedSeries no_constant(4);
  no_constant[1] = 1.0;
  CHECK_THROWS_AS(series::reciprocal(no_constant), std::domain_error);
  CHECK_THROWS_AS(series::sqrt(no_constant), std::domain_error);
  series::TruncatedSeries a(3), b(4);
  CHECK_THROWS_AS(series::mul(a, b), std::invalid_argument);
}

TEST_CASE("series ring laws") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = random_series(rng, 12, -0.5, 0.5);
    const auto g = random_series(rng, 12, -0.5, 0.5);
    const auto h = random_series(rng, 12, -0.5, 0.5);

    const auto lhs = series::mul(series::mul(f, g), h);
    const auto rhs = series::mul(f, series::mul(g, h));
    for (int i = 0; i <= 12; ++i) CHECK_THAT(lhs[i], WithinAbs(rhs[i], 1e-12));

    const auto exp_sum = series::exp(series::add(f, g));
    const auto exp_prod = series::mul(series::exp(f), series::exp(g));
    for (int i = 0; i <= 12; ++i) CHECK_THAT(exp_sum[i], WithinAbs(exp_prod[i], 1e-12));
  }
}

TEST_CASE("reciprocal multiplies back to one") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    auto f = random_series(rng, 10, -1.0, 1.0);
    f[0] = (f[0] < 0.0 ? -1.0 : 1.0) * (0.5 + std::fabs(f[0]));
    const auto prod = series::mul(series::reciprocal(f), f);
    CHECK_THAT(prod[0], WithinAbs(1.0, 1e-12));
    for (int i = 1; i <= 10; ++i) CHECK_THAT(prod[i], WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("amplitude expansion: leading coefficients and oracle agreement") {
  const auto amp = series::expand_amplitude(10);
  CHECK_THAT(amp[0], WithinRel(1.3591409142295226, 1e-14));            // e/2
  CHECK_THAT(amp[1], WithinRel(0.33978522855738065, 1e-13));           // e/8 = (1/4)(e/2)
  CHECK_THAT(amp[1] / amp[0], WithinRel(0.25, 1e-13));
  CHECK_THAT(amp[2], WithinAbs(0.0, 1e-14));
  CHECK_THAT(amp[3], WithinRel(0.0070788589282787636, 1e-12));         // e/384

  const auto oracle = amplitude_coeffs_circle_oracle(10);
  for (int n = 0; n <= 10; ++n) {
    INFO("n=" << n);
    CHECK_THAT(amp[n], WithinAbs(oracle[static_cast<std::size_t>(n)], 1e-8));
  }
}

TEST_CASE("bidegree expansion slices") {
  const auto e1 = series::expand_exp_m_phi(1, 5);
  const double e_half = 1.3591409142295226;
  CHECK_THAT(e1.coefficient(1, 0), WithinRel(e_half, 1e-13));
  CHECK_THAT(e1.coefficient(0, 1), WithinRel(e_half, 1e-13));
  // odd-order amplitude slices vanish identically
  CHECK(e1.coefficient(2, 0) == 0.0);
  CHECK(e1.coefficient(1, 1) == 0.0);
  // degree-3 slice: magnitude (1/4)(e/2) binom(3, s)
  for (int s = 0; s <= 3; ++s) {
    const double binom = (s == 0 || s == 3) ? 1.0 : 3.0;
    INFO("s=" << s);
    CHECK_THAT(std::fabs(e1.coefficient(3 - s, s)), WithinRel(0.25 * e_half * binom, 1e-12));
  }

  const auto e2 = series::expand_exp_m_phi(2, 4);
  const double lead2 = e_half * e_half;
  CHECK_THAT(e2.coefficient(2, 0), WithinRel(lead2, 1e-13));
  CHECK_THAT(e2.coefficient(1, 1), WithinRel(2.0 * lead2, 1e-13));
  CHECK_THAT(e2.coefficient(0, 2), WithinRel(lead2, 1e-13));

  CHECK_THROWS_AS(series::expand_exp_m_phi(0, 3), std::domain_error);
  CHECK_THROWS_AS(series::expand_exp_m_phi(3, 2), std::domain_error);
}

TEST_CASE("bidegree symmetry is exact") {
  for (int m : {1, 2, 3, 5}) {
    const auto exp_m = series::expand_exp_m_phi(m, m + 6);
    for (int d = m; d <= m + 6; ++d)
      for (int b = 0; b <= d; ++b) CHECK(exp_m.coefficient(d - b, b) == exp_m.coefficient(b, d - b));
  }
}

TEST_CASE("two independent sign oracles for the degree-(m+2) slice agree") {
  for (int m : {1, 2, 3}) {
    const auto exp_m = series::expand_exp_m_phi(m, m + 2);
    const double engine_coeff = exp_m.coefficient(m + 2, 0);

    // grid fit of G(t) = e^{m Phi} / t^m near t = 0: the quadratic coefficient
    const auto g_of = [m](double t) {
      return std::exp(m * geom::potential_radial(t)) / std::pow(t, m);
    };
    const double t1 = 0.02, t2 = 0.01;
    const double fitted = (g_of(t1) - g_of(t2)) / (t1 * t1 - t2 * t2);

    INFO("m=" << m << " engine=" << engine_coeff << " fit=" << fitted);
    CHECK(engine_coeff != 0.0);
    CHECK((engine_coeff > 0.0) == (fitted > 0.0));
    // magnitude sanity of the fit against the engine value
    CHECK_THAT(fitted, WithinRel(engine_coeff, 1e-2));
  }
}

TEST_CASE("bidegree evaluation matches the potential near the origin") {
  for (int m : {1, 2, 4}) {
    const auto exp_m = series::expand_exp_m_phi(m, m + 8);
    const double x = 1e-2, y = 2e-2;
    const double truncated = exp_m.evaluate(x, y);
    const double exact = std::exp(m * geom::potential_radial(x + y));
    INFO("m=" << m);
    CHECK_THAT(truncated, WithinRel(exact, 1e-10));
  }
}
