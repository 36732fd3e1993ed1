#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "okoc/assembly.hpp"
#include "okoc/problem.hpp"
#include "okoc/solver.hpp"

namespace okoc {

/// Problem file violates the schema; `where` is a JSON pointer (or "line:col" for syntax).
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

/// An expression in the problem file failed to parse; `key` names the offending field.
class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct CenterParams {
  int M_S = 200;
  int M_D = 20;
  int M_b = 73;
  CenterStrategy strategy = CenterStrategy::Halton;
  std::uint64_t seed = 0;
};

struct ProblemConfig {
  ProblemSpec spec;
  CenterParams centers;
  SolveOptions solver;
  /// Fully resolved problem file (defaults filled in); loading it reproduces this config.
  nlohmann::json resolved;
};

/**
 * Validates and resolves a problem document. Unknown keys are rejected. Throws SchemaError for
 * structural problems and ExpressionError for expressions that fail to parse.
 *
 * Defaults: D = X; kernels S and D Gaussian, Sigma Wendland C4; Gaussian shape = median
 * pairwise squared distance of 200 Halton probes in the kernel's box; Wendland support radius
 * = 2 sqrt(that median); M_S = 200, M_D = 20, M_b = round((M_S + M_D) / 3), Halton, seed 0.
 */
ProblemConfig load_problem(const nlohmann::json& doc);
ProblemConfig load_problem_text(const std::string& text);
ProblemConfig load_problem_file(const std::string& path);

/// Applies a seed override and refreshes the resolved echo.
void override_seed(ProblemConfig& config, std::uint64_t seed);

}  // namespace okoc
