#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "okoc/problem_file.hpp"

namespace okoc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitToleranceNotMet = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitExpression = 65;
inline constexpr int kExitNumeric = 70;

struct SolveFlags {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool emit_weights = false;
  std::optional<std::string> plot_dir;
};

struct ValidateFlags {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> plot_dir;
  int controls = 20;
  int centers = 50;
  int steps = 400;
  int segments = 4;
  double threshold = 1e-4;
  double norm_slack = 1e-8;
};

struct OracleFlags {
  std::optional<std::string> out;
  std::vector<std::string> riccati;  // key=value tokens: a, b, q, r
  std::vector<std::string> brute;    // levels=v1,v2,... segments=k [steps=N]
};

/// Everything one solve produces; `report` is the JSON written by `okoc solve`.
struct SolveRun {
  CenterSet centers;
  FiniteProgram program;
  SolveResult result;
  nlohmann::json report;
};

/// generate_centers -> assemble -> solve, with the Report assembled from the outcome.
SolveRun run_solve(const ProblemConfig& config, bool emit_weights);

int exit_code_for(SolveStatus status);

int cmd_solve(const std::string& problem_path, const SolveFlags& flags, std::ostream& out,
              std::ostream& err);
int cmd_validate(const std::string& problem_path, const ValidateFlags& flags, std::ostream& out,
                 std::ostream& err);
int cmd_oracle(const std::string& problem_path, const OracleFlags& flags, std::ostream& out,
               std::ostream& err);

}  // namespace okoc
