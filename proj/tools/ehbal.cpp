// Command-line front end: every computation the library offers, with CSV/JSON
// artifacts and the f(x) plot bundle.

#include <string>

#include <CLI11.hpp>

#include "ehbal/cli.hpp"

namespace {

void add_common_options(CLI::App* cmd, ehbal::cli::RunConfig& cfg, std::string& grid_text,
                        std::string& format_text) {
  cmd->add_option("--m", cfg.m, "quantization level (default 1)");
  cmd->add_option("--dmax", cfg.dmax, "max total degree / degree budget (command default)");
  cmd->add_option("--tol", cfg.tol, "tolerance for truncation tails (default 1e-8)");
  cmd->add_option("--grid", grid_text, "grid spec x0:x1:n[,y0:y1:n] (default 0.01:4:100)");
  cmd->add_option("--x-min", cfg.x_min, "scan lower end (default 0)");
  cmd->add_option("--x-max", cfg.x_max, "scan upper end (default 200)");
  cmd->add_option("--step", cfg.step, "scan step (default 0.01)");
  cmd->add_option("--out", cfg.out, "output directory (default .)");
  cmd->add_option("--format", format_text, "artifact format: csv|json (default csv)")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--seed", cfg.seed, "seed for sampled checks (default 12345)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical toolkit for the balanced condition of the Eguchi-Hanson metric"};
  app.require_subcommand(1);

  ehbal::cli::RunConfig cfg;
  std::string grid_text;
  std::string format_text = "csv";

  using ehbal::cli::Command;
  struct Sub {
    const char* name;
    const char* desc;
    Command command;
  };
  const Sub subs[] = {
      {"norms", "monomial norm table (CSV: j,k,m,logN,method)", Command::Norms},
      {"epsilon", "density profile over a grid (CSV: m,x,y,epsilon,tail_estimate,Dmax)",
       Command::Epsilon},
      {"balanced-check", "constancy verdict of the density over a grid", Command::BalancedCheck},
      {"obstruction", "constant candidates and f(m) for m = 1..M", Command::Obstruction},
      {"expand", "bidegree expansion of e^{m Phi} with slice checks", Command::Expand},
      {"figure1", "scan f(x), emit CSV plus plot script", Command::Figure1},
      {"ricci-check", "finite-difference Ricci-flatness check at sampled points",
       Command::RicciCheck},
  };

  for (const auto& sub : subs) {
    auto* cmd = app.add_subcommand(sub.name, sub.desc);
    add_common_options(cmd, cfg, grid_text, format_text);
    if (sub.command == Command::Norms)
      cmd->add_option("--check-orthogonality", cfg.mc_pairs,
                      "also Monte-Carlo check this many random off-diagonal inner products");
    cmd->callback([&cfg, command = sub.command] { cfg.command = command; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // validation problems are exit code 1
  }

  cfg.format = format_text == "json" ? ehbal::cli::OutputFormat::Json
                                     : ehbal::cli::OutputFormat::Csv;
  if (!grid_text.empty()) {
    try {
      cfg.grid = ehbal::cli::GridSpec::parse(grid_text);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  return ehbal::cli::run_with_status(cfg);
}
