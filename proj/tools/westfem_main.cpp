// Command line front end.  See README.md for the mode reference.

#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "westfem/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Westervelt finite element toolkit"};
  westfem::RunConfig cfg;
  std::vector<std::string> tol_args;

  app.add_option("--scenario", cfg.scenario_path, "scenario JSON file")
      ->required();
  app.add_option("--mode", cfg.mode,
                 "simulate | check-estimates | certify | oracle-compare | "
                 "mms | sweep");
  app.add_option("--out", cfg.out_dir, "output directory");
  app.add_option("--seed", cfg.seed, "seed for randomized constant search");
  app.add_option("--workers", cfg.workers, "parallel workers for sweep mode");
  app.add_option("--tol", tol_args, "tolerance override NAME=VALUE")
      ->expected(-1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 3;
  }

  for (const std::string& t : tol_args) {
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::fprintf(stderr, "error: --tol expects NAME=VALUE, got '%s'\n",
                   t.c_str());
      return 3;
    }
    try {
      cfg.tol[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
    } catch (const std::exception&) {
      std::fprintf(stderr, "error: bad --tol value in '%s'\n", t.c_str());
      return 3;
    }
  }

  return westfem::run_cli(cfg);
}
