#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "okoc/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"okoc: occupation-kernel optimal control"};
  app.require_subcommand(1);

  std::string problem;
  okoc::SolveFlags solve_flags;
  okoc::ValidateFlags validate_flags;
  okoc::OracleFlags oracle_flags;

  auto* solve = app.add_subcommand("solve", "assemble and solve the finite program");
  solve->add_option("problem", problem, "problem file (JSON)")->required();
  solve->add_option("--out", solve_flags.out, "report path (default <problem>.report.json)");
  solve->add_option("--seed", solve_flags.seed, "override the center seed");
  solve->add_flag("--emit-weights", solve_flags.emit_weights, "include w and v in the report");
  solve->add_option("--emit-plot-data", solve_flags.plot_dir, "write center/weight CSVs to DIR");

  auto* validate = app.add_subcommand("validate", "check the adjoint identity and norm bound");
  validate->add_option("problem", problem, "problem file (JSON)")->required();
  validate->add_option("--out", validate_flags.out, "residual table (default <problem>.validate.csv)");
  validate->add_option("--seed", validate_flags.seed, "random seed (default: the file's seed)");
  validate->add_option("--emit-plot-data", validate_flags.plot_dir, "write a residual histogram to DIR");
  validate->add_option("--controls", validate_flags.controls, "random controls")->capture_default_str();
  validate->add_option("--centers", validate_flags.centers, "random Sigma centers per control")
      ->capture_default_str();
  validate->add_option("--steps", validate_flags.steps, "RK4/Simpson steps (even)")->capture_default_str();
  validate->add_option("--segments", validate_flags.segments, "control segments")->capture_default_str();
  validate->add_option("--threshold", validate_flags.threshold, "adjoint residual threshold")
      ->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "ground-truth costs");
  oracle->add_option("problem", problem, "problem file (JSON)")->required();
  oracle->add_option("--out", oracle_flags.out, "output CSV (default <problem>.oracle.csv)");
  oracle->add_option("--riccati", oracle_flags.riccati, "scalar LQ coefficients: a= b= q= r=")
      ->expected(0, 4)
      ->allow_extra_args();
  oracle->add_option("--brute", oracle_flags.brute, "levels=v1,v2,... segments=K [steps=N]")
      ->expected(1, 3);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : okoc::kExitUsage;
  }

  if (solve->parsed()) return okoc::cmd_solve(problem, solve_flags, std::cout, std::cerr);
  if (validate->parsed()) return okoc::cmd_validate(problem, validate_flags, std::cout, std::cerr);
  return okoc::cmd_oracle(problem, oracle_flags, std::cout, std::cerr);
}
