#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ehbal/eh_geometry.hpp"
#include "ehbal/epsilon.hpp"
#include "ehbal/errors.hpp"
#include "ehbal/io.hpp"
#include "ehbal/moments.hpp"
#include "ehbal/obstruction.hpp"
#include "ehbal/series.hpp"
#include "ehbal/special_functions.hpp"

namespace ehbal::cli {

enum class Command { Norms, Epsilon, BalancedCheck, Obstruction, Expand, Figure1, RicciCheck };

enum class OutputFormat { Csv, Json };

/// Linear grid "x0:x1:n" with an optional ",y0:y1:n" second axis; without the
/// second axis the grid runs along y = 0.
struct GridSpec {
  double x0 = 0.01, x1 = 4.0;
  int nx = 100;
  bool has_y = false;
  double y0 = 0.0, y1 = 0.0;
  int ny = 1;

  static GridSpec parse(const std::string& text) {
    auto parse_axis = [](const std::string& part, double& a, double& b, int& n) {
      std::istringstream in(part);
      std::string f0, f1, f2;
      if (!std::getline(in, f0, ':') || !std::getline(in, f1, ':') || !std::getline(in, f2))
        throw std::invalid_argument("cli.run: grid axis must be start:stop:count");
      a = std::stod(f0);
      b = std::stod(f1);
      n = std::stoi(f2);
      if (n < 1) throw std::invalid_argument("cli.run: grid count must be >= 1");
    };
    GridSpec g;
    const auto comma = text.find(',');
    parse_axis(text.substr(0, comma), g.x0, g.x1, g.nx);
    if (comma != std::string::npos) {
      g.has_y = true;
      parse_axis(text.substr(comma + 1), g.y0, g.y1, g.ny);
    }
    return g;
  }

  static std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
      out.push_back(a);
      return out;
    }
    for (int i = 0; i < n; ++i)
      out.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
    return out;
  }

  std::vector<std::pair<double, double>> points() const {
    std::vector<std::pair<double, double>> pts;
    const auto xs = linspace(x0, x1, nx);
    const auto ys = has_y ? linspace(y0, y1, ny) : std::vector<double>{0.0};
    pts.reserve(xs.size() * ys.size());
    for (double y : ys)
      for (double x : xs) pts.emplace_back(x, y);
    return pts;
  }
};

struct RunConfig {
  Command command = Command::Norms;
  int m = 1;
  int dmax = -1;       // default depends on the command
  double tol = 1e-8;
  std::optional<GridSpec> grid;
  double x_min = 0.0;
  double x_max = 200.0;
  double step = 0.01;
  std::filesystem::path out = ".";
  OutputFormat format = OutputFormat::Csv;
  std::uint64_t seed = 12345;
  int mc_pairs = 0;    // norms: also run the Monte-Carlo orthogonality check
};

namespace detail {

using Json = nlohmann::ordered_json;

inline Json metadata(const RunConfig& cfg, const char* command) {
  Json meta;
  meta["command"] = command;
  meta["m"] = cfg.m;
  meta["tol"] = cfg.tol;
  meta["format"] = cfg.format == OutputFormat::Csv ? "csv" : "json";
  return meta;
}

inline void write_artifact(const RunConfig& cfg, const std::string& name_stem,
                           const std::string& csv, const Json& json_doc) {
  const auto path = cfg.out / (name_stem + (cfg.format == OutputFormat::Csv ? ".csv" : ".json"));
  if (cfg.format == OutputFormat::Csv)
    io::atomic_write_text(path, csv);
  else
    io::atomic_write_text(path, json_doc.dump(2) + "\n");
  std::cout << "wrote " << path.string() << "\n";
}

inline int run_norms(const RunConfig& cfg) {
  const int dmax = cfg.dmax < 0 ? cfg.m + 8 : cfg.dmax;
  auto table = moments::build_table(cfg.m, dmax);

  std::size_t closed = 0;
  for (const auto& row : table.rows())
    if (row.method == moments::NormMethod::ClosedForm) ++closed;

  Json doc;
  doc["metadata"] = metadata(cfg, "norms");
  doc["metadata"]["dmax"] = dmax;
  Json rows = Json::array();
  for (const auto& row : table.rows())
    rows.push_back({{"j", row.j},
                    {"k", row.k},
                    {"m", cfg.m},
                    {"logN", row.log_norm},
                    {"method", to_string(row.method)}});
  doc["rows"] = std::move(rows);
  write_artifact(cfg, "norms", table.to_csv(), doc);

  std::cout << "norms: m=" << cfg.m << " dmax=" << dmax << " entries=" << table.size()
            << " (closed-form " << closed << ", quadrature " << table.size() - closed << ")\n";

  if (cfg.mc_pairs > 0) {
    const auto estimates = moments::mc_orthogonality(cfg.m, cfg.mc_pairs, 200000, cfg.seed);
    bool all_ok = true;
    for (const auto& e : estimates) {
      const bool ok = e.zero_within(3.0);
      all_ok = all_ok && ok;
      std::cout << "orthogonality <z1^" << e.j1 << " z2^" << e.k1 << ", z1^" << e.j2 << " z2^"
                << e.k2 << ">: re=" << e.real_mean << " (se " << e.real_se
                << "), im=" << e.imag_mean << " (se " << e.imag_se << ") "
                << (ok ? "OK" : "OUTSIDE 3 SIGMA") << "\n";
    }
    if (!all_ok) throw convergence_error("cli.norms: Monte-Carlo orthogonality outside 3 sigma");
  }
  return 0;
}

inline int run_epsilon(const RunConfig& cfg) {
  const GridSpec grid = cfg.grid.value_or(GridSpec{});
  auto table = moments::build_table(cfg.m, cfg.m);
  const int budget = cfg.dmax < 0 ? epsilon::default_degree_budget(cfg.m) : cfg.dmax;
  const auto prof = epsilon::profile(cfg.m, grid.points(), cfg.tol, table, budget);

  Json doc;
  doc["metadata"] = metadata(cfg, "epsilon");
  doc["metadata"]["degree_budget"] = budget;
  Json rows = Json::array();
  for (const auto& s : prof.samples)
    rows.push_back({{"m", cfg.m},
                    {"x", s.x},
                    {"y", s.y},
                    {"epsilon", s.value},
                    {"tail_estimate", s.tail_estimate},
                    {"Dmax", s.degree_used}});
  doc["rows"] = std::move(rows);
  write_artifact(cfg, "epsilon", prof.to_csv(), doc);

  double lo = prof.samples.front().value, hi = lo;
  for (const auto& s : prof.samples) {
    lo = std::min(lo, s.value);
    hi = std::max(hi, s.value);
  }
  std::cout << "epsilon: m=" << cfg.m << " samples=" << prof.samples.size() << " min=" << lo
            << " max=" << hi << "\n";
  return 0;
}

inline int run_balanced_check(const RunConfig& cfg) {
  const GridSpec grid = cfg.grid.value_or(GridSpec{});
  auto table = moments::build_table(cfg.m, cfg.m);
  const int budget = cfg.dmax < 0 ? epsilon::default_degree_budget(cfg.m) : cfg.dmax;
  const auto rep = epsilon::balanced_test(cfg.m, grid.points(), cfg.tol, table, budget);

  std::ostringstream csv;
  csv << "m,min,max,relative_variation,max_tail_estimate,balanced\n"
      << cfg.m << ',' << io::format_double(rep.min_value) << ',' << io::format_double(rep.max_value)
      << ',' << io::format_double(rep.relative_variation) << ','
      << io::format_double(rep.max_tail_estimate) << ',' << (rep.balanced ? "true" : "false")
      << '\n';

  Json doc;
  doc["metadata"] = metadata(cfg, "balanced-check");
  doc["rows"] = Json::array({{{"m", cfg.m},
                              {"min", rep.min_value},
                              {"max", rep.max_value},
                              {"relative_variation", rep.relative_variation},
                              {"max_tail_estimate", rep.max_tail_estimate},
                              {"balanced", rep.balanced}}});
  write_artifact(cfg, "balanced", csv.str(), doc);

  if (rep.balanced)
    std::cout << "balanced within tolerance (variation " << rep.relative_variation
              << " <= 10 x tail " << rep.max_tail_estimate << ")\n";
  else
    std::cout << "NOT balanced (variation >> tail error): relative_variation="
              << rep.relative_variation << " max_tail=" << rep.max_tail_estimate << "\n";
  return 0;
}

inline int run_obstruction(const RunConfig& cfg) {
  std::ostringstream csv;
  csv << "m,log_c_lowest,log_c_gap,relative_gap,f\n";
  Json rows = Json::array();
  double min_gap = std::numeric_limits<double>::infinity();
  for (int m = 1; m <= cfg.m; ++m) {
    const double lc8 = obstruction::log_c_from_lowest_norm(m);
    const double lc9 = obstruction::log_c_from_gap_norm(m);
    const double gap = -std::expm1(lc9 - lc8);  // (C8 - C9) / C8
    const double f = obstruction::obstruction_function(static_cast<double>(m));
    min_gap = std::min(min_gap, std::fabs(gap));
    csv << m << ',' << io::format_double(lc8) << ',' << io::format_double(lc9) << ','
        << io::format_double(gap) << ',' << io::format_double(f) << '\n';
    rows.push_back({{"m", m},
                    {"log_c_lowest", lc8},
                    {"log_c_gap", lc9},
                    {"relative_gap", gap},
                    {"f", f}});
  }
  Json doc;
  doc["metadata"] = metadata(cfg, "obstruction");
  doc["rows"] = std::move(rows);
  write_artifact(cfg, "obstruction", csv.str(), doc);
  std::cout << "obstruction: m=1.." << cfg.m
            << " min |relative gap| between the constant candidates = " << min_gap << "\n";
  return 0;
}

inline int run_expand(const RunConfig& cfg) {
  const int dtot = cfg.dmax < 0 ? cfg.m + 2 : cfg.dmax;
  const auto expansion = series::expand_exp_m_phi(cfg.m, dtot);

  std::ostringstream csv;
  csv << "a,b,coefficient\n";
  Json rows = Json::array();
  for (int d = expansion.min_total_degree(); d <= expansion.max_total_degree(); ++d)
    for (int b = 0; b <= d; ++b) {
      csv << (d - b) << ',' << b << ',' << io::format_double(expansion.coefficient(d - b, b))
          << '\n';
      rows.push_back({{"a", d - b}, {"b", b}, {"coefficient", expansion.coefficient(d - b, b)}});
    }
  Json doc;
  doc["metadata"] = metadata(cfg, "expand");
  doc["metadata"]["dmax"] = dtot;
  doc["rows"] = std::move(rows);
  write_artifact(cfg, "expand", csv.str(), doc);

  const double lead = std::pow(1.359140914229522617680143735676331, cfg.m);  // (e/2)^m
  std::cout << "expand: m=" << cfg.m << " degree-" << cfg.m << " slice / binomial = "
            << expansion.coefficient(cfg.m, 0) / lead << " (1 expected)\n";
  if (dtot >= cfg.m + 2) {
    const double second = expansion.coefficient(cfg.m + 2, 0);
    const double magnitude_ref = 0.25 * cfg.m * lead;
    std::cout << "expand: degree-" << (cfg.m + 2)
              << " slice sign is " << (second > 0 ? "positive" : "negative")
              << "; |slice|/((m/4)(e/2)^m binom) = " << std::fabs(second) / magnitude_ref << "\n";
    std::cout << "finding: an alternating-in-m sign convention for that slice matches "
              << ((cfg.m % 2 == 0) == (second > 0) ? "this" : "the opposite") << " sign at m="
              << cfg.m << "\n";
  }
  return 0;
}

inline int run_figure1(const RunConfig& cfg) {
  const auto rep = obstruction::scan(cfg.x_min, cfg.x_max, cfg.step);
  obstruction::write_plot_bundle(rep, cfg.out, "figure1");
  std::cout << "wrote " << (cfg.out / "figure1.csv").string() << " and "
            << (cfg.out / "figure1_plot.py").string() << "\n";

  if (cfg.format == OutputFormat::Json) {
    Json doc;
    doc["metadata"] = metadata(cfg, "figure1");
    doc["metadata"]["x_min"] = cfg.x_min;
    doc["metadata"]["x_max"] = cfg.x_max;
    doc["metadata"]["step"] = cfg.step;
    Json rows = Json::array();
    for (const auto& [x, f] : rep.samples) rows.push_back({{"x", x}, {"f", f}});
    doc["rows"] = std::move(rows);
    io::atomic_write_text(cfg.out / "figure1.json", doc.dump(2) + "\n");
    std::cout << "wrote " << (cfg.out / "figure1.json").string() << "\n";
  }

  std::cout << "figure1: " << rep.samples.size() << " samples on [" << cfg.x_min << ", "
            << cfg.x_max << "], sign changes: " << rep.sign_changes.size()
            << ", failed samples: " << rep.failed_samples << "\n";
  std::cout << "figure1: f(" << 0.5 * cfg.x_max << ") = " << rep.f_mid << ", f(" << cfg.x_max
            << ") = " << rep.f_end << "\n";
  for (const auto& br : rep.sign_changes)
    std::cout << "figure1: sign change inside [" << io::format_double(br.lower) << ", "
              << io::format_double(br.upper) << "]\n";
  return 0;
}

inline int run_ricci_check(const RunConfig& cfg) {
  // The grid x-axis is reused as the radius range: "r0:r1:count".
  const GridSpec grid = cfg.grid.value_or(GridSpec{0.3, 5.0, 20});
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::ostringstream csv;
  csv << "z1_re,z1_im,z2_re,z2_im,defect,eig_min,eig_max\n";
  Json rows = Json::array();
  double worst_defect = 0.0;
  double min_eig = std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid.nx; ++i) {
    const double r = grid.x0 * std::pow(grid.x1 / grid.x0, unit(rng));
    const double c = 2.0 * unit(rng) - 1.0;  // cos of the polar angle
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    const double ph1 = 2.0 * 3.14159265358979323846 * unit(rng);
    const double ph2 = 2.0 * 3.14159265358979323846 * unit(rng);
    const geom::PointC2 p{std::polar(r * s, ph1), std::polar(r * c, ph2)};

    const auto g = geom::metric_matrix(p);
    const auto eig = g.eigenvalues();
    const double defect = geom::ricci_defect(p);
    worst_defect = std::max(worst_defect, defect);
    min_eig = std::min(min_eig, eig[0]);

    csv << io::format_double(p.z1.real()) << ',' << io::format_double(p.z1.imag()) << ','
        << io::format_double(p.z2.real()) << ',' << io::format_double(p.z2.imag()) << ','
        << io::format_double(defect) << ',' << io::format_double(eig[0]) << ','
        << io::format_double(eig[1]) << '\n';
    rows.push_back({{"z1_re", p.z1.real()},
                    {"z1_im", p.z1.imag()},
                    {"z2_re", p.z2.real()},
                    {"z2_im", p.z2.imag()},
                    {"defect", defect},
                    {"eig_min", eig[0]},
                    {"eig_max", eig[1]}});
  }
  Json doc;
  doc["metadata"] = metadata(cfg, "ricci-check");
  doc["metadata"]["seed"] = cfg.seed;
  doc["rows"] = std::move(rows);
  write_artifact(cfg, "ricci", csv.str(), doc);

  std::cout << "ricci-check: " << grid.nx << " points with |z| in [" << grid.x0 << ", " << grid.x1
            << "], max defect = " << worst_defect << ", min metric eigenvalue = " << min_eig
            << "\n";
  return 0;
}

}  // namespace detail

namespace detail {

// fail fast, before any table building or scanning starts
inline void validate_config(const RunConfig& cfg) {
  if (cfg.m < 1) throw std::domain_error("cli.run: requires m >= 1");
  if (!(cfg.tol > 0.0)) throw std::domain_error("cli.run: requires tol > 0");
  if (!(cfg.step > 0.0)) throw std::domain_error("cli.run: requires step > 0");
  if (!(cfg.x_min >= 0.0) || (cfg.command == Command::Figure1 && !(cfg.x_max > cfg.x_min)))
    throw std::domain_error("cli.run: requires 0 <= x-min < x-max");
  if (cfg.grid) {
    const auto& g = *cfg.grid;
    if (g.nx < 1 || g.ny < 1) throw std::domain_error("cli.run: grid counts must be >= 1");
  }
}

}  // namespace detail

/// Executes one command; deterministic artifacts for a fixed config.
/// Returns 0 on success; domain/validation problems map to exit code 1 and
/// numerical non-convergence to 2 (see run_with_status).
inline int run(const RunConfig& cfg) {
  detail::validate_config(cfg);
  switch (cfg.command) {
    case Command::Norms: return detail::run_norms(cfg);
    case Command::Epsilon: return detail::run_epsilon(cfg);
    case Command::BalancedCheck: return detail::run_balanced_check(cfg);
    case Command::Obstruction: return detail::run_obstruction(cfg);
    case Command::Expand: return detail::run_expand(cfg);
    case Command::Figure1: return detail::run_figure1(cfg);
    case Command::RicciCheck: return detail::run_ricci_check(cfg);
  }
  throw std::invalid_argument("cli.run: unknown command");
}

/// run() with exceptions mapped onto the exit-code contract.
inline int run_with_status(const RunConfig& cfg) {
  try {
    return run(cfg);
  } catch (const convergence_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const singularity_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace ehbal::cli
