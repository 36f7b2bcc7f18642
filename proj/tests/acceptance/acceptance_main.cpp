// Acceptance suite: one pass/fail line per criterion, exit 0 only when every
// criterion holds at its stated tolerance.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ehbal/eh_geometry.hpp"
#include "ehbal/epsilon.hpp"
#include "ehbal/moments.hpp"
#include "ehbal/obstruction.hpp"
#include "ehbal/quadrature.hpp"
#include "ehbal/series.hpp"
#include "ehbal/special_functions.hpp"

using namespace ehbal;

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int index, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++g_failures;
  std::printf("[%d] %s %s (%s)\n", index, pass ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
}

template <typename Fn>
void criterion(int index, const std::string& name, Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    report(index, name, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double rel_diff_from_logs(double log_a, double log_b) { return std::fabs(std::expm1(log_a - log_b)); }

void criterion_1_closed_vs_quadrature() {
  Timer timer;
  double worst = 0.0;
  for (int m = 1; m <= 50; ++m) {
    worst = std::max(worst, rel_diff_from_logs(moments::log_norm_squared({m, 0, m}),
                                               moments::log_closed_norm_min(m)));
    worst = std::max(worst, rel_diff_from_logs(moments::log_norm_squared({m + 2, 0, m}),
                                               moments::log_closed_norm_gap2(m)));
  }
  const double secs = timer.seconds();
  report(1, "closed-form vs quadrature norms, m = 1..50", worst <= 1e-9 && secs < 60.0,
         "max rel diff " + fmt(worst) + ", " + fmt(secs) + " s (target < 60 s)");
}

void criterion_2_exact_anchors() {
  const double z1_exact = 3.5 * std::exp(-1.0);    // 7 / (2e)
  const double z1c_exact = 18.5 * std::exp(-1.0);  // 74 / (4e)
  const double d1 = std::fabs(moments::closed_norm_min(1) / z1_exact - 1.0);
  const double d2 = std::fabs(moments::closed_norm_gap2(1) / z1c_exact - 1.0);
  const double d3 = std::fabs(moments::norm_squared({1, 0, 1}) / z1_exact - 1.0);
  const double d4 = std::fabs(moments::norm_squared({3, 0, 1}) / z1c_exact - 1.0);
  const double worst = std::max({d1, d2, d3, d4});
  report(2, "exact norm anchors 7/(2e) and 74/(4e)", worst <= 1e-10,
         "max rel diff " + fmt(worst));
}

void criterion_3_obstruction_at_integers() {
  bool pass = true;
  std::ostringstream detail;

  const double f0 = obstruction::obstruction_function(0.0);
  if (!(std::fabs(f0) <= 1e-14)) pass = false;

  const double f1 = obstruction::obstruction_function(1.0);
  const double f1_exact = 166.0 * std::exp(2.0) / 777.0;
  if (!(std::fabs(f1 / f1_exact - 1.0) <= 1e-9)) pass = false;

  // Nonzeroness of f at every integer level 1..50.  f decays below the
  // absolute floor 1e-8 |f(1)| around m = 14 (it falls super-exponentially, as
  // the x -> infinity limit demands), so magnitude alone can only certify the
  // small levels; every level is additionally certified scale-free through the
  // relative gap of the two constant candidates, which a genuine root would
  // collapse to zero.
  const double floor_abs = 1e-8 * std::fabs(f1);
  int certified_abs = 0;
  double min_rel_gap = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= 50; ++m) {
    const double fm = obstruction::obstruction_function(static_cast<double>(m));
    if (fm == 0.0) pass = false;
    if (std::fabs(fm) > floor_abs) ++certified_abs;
    const double gap = std::fabs(std::expm1(obstruction::log_c_from_gap_norm(m) -
                                            obstruction::log_c_from_lowest_norm(m)));
    min_rel_gap = std::min(min_rel_gap, gap);
    if (!(gap > 1e-8)) pass = false;
  }

  detail << "f(0) = " << fmt(f0) << ", f(1) rel err " << fmt(std::fabs(f1 / f1_exact - 1.0))
         << "; nonzero certified by |f(m)| > 1e-8 |f(1)| for " << certified_abs
         << "/50 levels, by candidate gap > 1e-8 for 50/50 (min gap " << fmt(min_rel_gap) << ")";
  report(3, "obstruction function at integer levels", pass, detail.str());
}

void criterion_4_scan_and_limit() {
  Timer timer;
  const auto rep = obstruction::scan(0.01, 200.0, 0.01);
  const double fa1 = std::fabs(obstruction::obstruction_function(1.0));
  const double fa100 = std::fabs(obstruction::obstruction_function(100.0));
  const double fa200 = std::fabs(obstruction::obstruction_function(200.0));
  const bool ordered = fa200 < fa100 && fa100 < fa1;
  const double secs = timer.seconds();
  const bool pass = rep.sign_changes.empty() && rep.failed_samples == 0 && ordered && secs < 120.0;
  std::ostringstream detail;
  detail << rep.samples.size() << " samples, " << rep.sign_changes.size()
         << " sign changes; |f(200)| = " << fmt(fa200) << " < |f(100)| = " << fmt(fa100)
         << " < |f(1)| = " << fmt(fa1) << "; " << fmt(secs) << " s (target < 120 s)";
  report(4, "full scan of (0, 200]: no roots, decaying tail", pass, detail.str());
}

void criterion_5_series_slices() {
  bool pass = true;
  double worst_lead = 0.0, worst_second = 0.0;
  bool all_signs_positive = true;

  for (int m = 1; m <= 6; ++m) {
    const auto expansion = series::expand_exp_m_phi(m, m + 2);
    const double lead = std::pow(1.3591409142295226, m);  // (e/2)^m

    std::vector<double> pascal_m(static_cast<std::size_t>(m) + 1, 1.0);
    for (int s = 1; s <= m; ++s)
      pascal_m[static_cast<std::size_t>(s)] =
          pascal_m[static_cast<std::size_t>(s - 1)] * (m - s + 1) / s;
    for (int s = 0; s <= m; ++s) {
      const double expected = lead * pascal_m[static_cast<std::size_t>(s)];
      worst_lead = std::max(
          worst_lead, std::fabs(expansion.coefficient(m - s, s) / expected - 1.0));
    }

    std::vector<double> pascal_m2(static_cast<std::size_t>(m) + 3, 1.0);
    for (int s = 1; s <= m + 2; ++s)
      pascal_m2[static_cast<std::size_t>(s)] =
          pascal_m2[static_cast<std::size_t>(s - 1)] * (m + 2 - s + 1) / s;
    for (int s = 0; s <= m + 2; ++s) {
      const double expected_mag = 0.25 * m * lead * pascal_m2[static_cast<std::size_t>(s)];
      worst_second =
          std::max(worst_second,
                   std::fabs(std::fabs(expansion.coefficient(m + 2 - s, s)) / expected_mag - 1.0));
    }

    // sign by two independent oracles: the series engine and a grid fit of
    // e^{m Phi} / t^m near t = 0
    const double engine = expansion.coefficient(m + 2, 0);
    auto g_of = [m](double t) {
      return std::exp(m * geom::potential_radial(t)) / std::pow(t, m);
    };
    const double fitted = (g_of(0.02) - g_of(0.01)) / (0.02 * 0.02 - 0.01 * 0.01);
    if ((engine > 0.0) != (fitted > 0.0)) pass = false;
    if (engine <= 0.0) all_signs_positive = false;
  }

  if (worst_lead > 1e-10 || worst_second > 1e-8) pass = false;

  std::ostringstream detail;
  detail << "degree-m slice max rel err " << fmt(worst_lead) << " (tol 1e-10), degree-(m+2) "
         << "magnitude max rel err " << fmt(worst_second) << " (tol 1e-8); both sign oracles "
         << "agree on " << (all_signs_positive ? "+" : "mixed") << " for every m";
  report(5, "bidegree slices of e^{m Phi}, m = 1..6", pass, detail.str());
  std::printf("    finding: the degree-(m+2) slice carries a positive factor (m/4)(e/2)^m for\n"
              "    every m tested; a sign convention alternating like (-e/2)^m would flip the\n"
              "    odd-m slices and does NOT match the computed expansion (both oracles).\n");
}

void criterion_6_epsilon_nonconstancy() {
  bool pass = true;
  std::ostringstream detail;
  for (int m = 1; m <= 3; ++m) {
    auto table = moments::build_table(m, m);
    std::vector<std::pair<double, double>> grid;
    for (int i = 0; i < 100; ++i)
      grid.emplace_back(0.01 + (4.0 - 0.01) * static_cast<double>(i) / 99.0, 0.0);
    const auto rep = epsilon::balanced_test(m, grid, 1e-9, table);
    const bool ok = rep.relative_variation > 100.0 * rep.max_tail_estimate && !rep.balanced;
    if (!ok) pass = false;
    detail << "m=" << m << ": variation " << fmt(rep.relative_variation) << " vs 100*tail "
           << fmt(100.0 * rep.max_tail_estimate) << (m < 3 ? "; " : "");
  }
  report(6, "density non-constancy for m = 1, 2, 3", pass, detail.str());
}

void criterion_7_geometry_sanity() {
  std::mt19937_64 rng(424242);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst_defect = 0.0;
  bool all_pd = true;
  for (int i = 0; i < 20; ++i) {
    const double r = 0.3 * std::pow(5.0 / 0.3, unit(rng));
    const double c = 2.0 * unit(rng) - 1.0;
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double ph1 = 6.283185307179586 * unit(rng);
    const double ph2 = 6.283185307179586 * unit(rng);
    const geom::PointC2 p{std::polar(r * s, ph1), std::polar(r * c, ph2)};
    worst_defect = std::max(worst_defect, geom::ricci_defect(p, 1e-3));
    all_pd = all_pd && geom::metric_matrix(p).positive_definite();
  }
  report(7, "Ricci-flatness and positivity at 20 sampled points", worst_defect < 1e-4 && all_pd,
         "max defect " + fmt(worst_defect) + " (tol 1e-4), metric positive definite: " +
             (all_pd ? "yes" : "NO"));
}

void criterion_8_special_function_invariants() {
  // recurrence Gamma(a+1,b) = a Gamma(a,b) + b^a e^{-b} on a 100 x 100 grid
  double worst_rec = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double a = 0.011 * std::pow(500.0 / 0.011, static_cast<double>(i) / 99.0);
    for (int jj = 0; jj < 100; ++jj) {
      const double b = 1000.0 * static_cast<double>(jj) / 99.0;
      const double lhs = sf::log_gamma_upper(a + 1.0, b);
      const double t1 = std::log(a) + sf::log_gamma_upper(a, b);
      double rhs = t1;
      if (b > 0.0) {
        const double t2 = a * std::log(b) - b;
        const double hi = std::max(t1, t2);
        rhs = hi + std::log1p(std::exp(std::min(t1, t2) - hi));
      }
      worst_rec = std::max(worst_rec, std::fabs(lhs - rhs) / std::max(1.0, std::fabs(rhs)));
    }
  }

  // integer-shape consistency on the same scale of grid
  double worst_int = 0.0;
  for (int n = 0; n < 100; ++n) {
    for (int jj = 0; jj < 100; ++jj) {
      const double b = 1000.0 * static_cast<double>(jj) / 99.0;
      const double general = sf::log_gamma_upper(static_cast<double>(n + 1), b);
      const double integer = sf::log_gamma_upper_int(n, b);
      worst_int =
          std::max(worst_int, std::fabs(general - integer) / std::max(1.0, std::fabs(integer)));
    }
  }

  // angular identity against direct quadrature
  double worst_beta = 0.0;
  for (int j = 0; j <= 10; ++j) {
    for (int k = 0; k <= 10; ++k) {
      auto integrand = [=](double th) {
        return std::pow(std::cos(th), 2 * j + 1) * std::pow(std::sin(th), 2 * k + 1);
      };
      const auto q =
          quadrature::integrate_adaptive(integrand, 0.0, 1.5707963267948966, 0.0, 1e-13);
      const double exact = sf::beta_angular(j, k).convert_to<double>();
      worst_beta = std::max(worst_beta, std::fabs(q.value / exact - 1.0));
    }
  }

  const bool pass = worst_rec <= 1e-11 && worst_int <= 1e-12 && worst_beta <= 1e-10;
  report(8, "Gamma recurrence/consistency grids and angular identity", pass,
         "recurrence " + fmt(worst_rec) + " (tol 1e-11), integer consistency " + fmt(worst_int) +
             " (tol 1e-12), angular " + fmt(worst_beta) + " (tol 1e-10)");
}

void criterion_9_orthogonality() {
  const auto estimates = moments::mc_orthogonality(2, 10, 200000, 20240918);
  bool pass = true;
  double worst_sigma = 0.0;
  for (const auto& e : estimates) {
    const double s_re = e.real_se > 0.0 ? std::fabs(e.real_mean) / e.real_se : 0.0;
    const double s_im = e.imag_se > 0.0 ? std::fabs(e.imag_mean) / e.imag_se : 0.0;
    worst_sigma = std::max({worst_sigma, s_re, s_im});
    if (!e.zero_within(3.0)) pass = false;
  }
  report(9, "Monte-Carlo orthogonality of 10 monomial pairs at m = 2", pass,
         "worst |mean|/se = " + fmt(worst_sigma) + " (limit 3)");
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion(1, "closed-form vs quadrature norms, m = 1..50", criterion_1_closed_vs_quadrature);
  criterion(2, "exact norm anchors 7/(2e) and 74/(4e)", criterion_2_exact_anchors);
  criterion(3, "obstruction function at integer levels", criterion_3_obstruction_at_integers);
  criterion(4, "full scan of (0, 200]: no roots, decaying tail", criterion_4_scan_and_limit);
  criterion(5, "bidegree slices of e^{m Phi}, m = 1..6", criterion_5_series_slices);
  criterion(6, "density non-constancy for m = 1, 2, 3", criterion_6_epsilon_nonconstancy);
  criterion(7, "Ricci-flatness and positivity at 20 sampled points", criterion_7_geometry_sanity);
  criterion(8, "Gamma recurrence/consistency grids and angular identity",
            criterion_8_special_function_invariants);
  criterion(9, "Monte-Carlo orthogonality of 10 monomial pairs at m = 2",
            criterion_9_orthogonality);

  std::printf("RESULT: %d/9 criteria passed\n", 9 - g_failures);
  return g_failures == 0 ? 0 : 1;
}
