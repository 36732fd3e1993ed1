#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "okoc/assembly.hpp"

namespace okoc {

struct SolveOptions {
  double eq_tol = 1e-6;    // target for ||A z - b||_inf
  double stat_tol = 1e-6;  // target for the projected-gradient stationarity measure
  int max_iters = 50000;   // cap on factorizations
  // Accepted and validated for file compatibility; the exact method uses no penalty.
  double penalty_init = 1.0;
  double penalty_growth = 10.0;

  void validate() const;
};

enum class SolveStatus { Optimal, ToleranceNotMet, Infeasible };

std::string_view to_string(SolveStatus status);

struct SolveResult {
  Eigen::VectorXd w;
  Eigen::VectorXd v;
  double objective = 0.0;
  double eq_residual_inf = 0.0;
  double ball_S_used = 0.0;  // w' G_S w / r_S
  double ball_D_used = 0.0;  // v' G_D v / r_D
  double stationarity = 0.0;
  double complementarity = 0.0;
  int iterations = 0;
  int outer_iterations = 0;
  SolveStatus status = SolveStatus::ToleranceNotMet;

  /// One multiplier per row of A; rows dropped as dependent carry 0.
  Eigen::VectorXd eq_multipliers;
  std::vector<int> dropped_rows;
  /// ||A z - b||_inf of every accepted outer iterate; non-increasing.
  std::vector<double> merit_history;

  Eigen::VectorXd z() const;
};

struct KktResiduals {
  double eq_residual_inf;
  double stationarity;
  double complementarity;
};

/**
 * @brief Euclidean projection onto the ellipsoid {y : y' G y <= r}.
 *
 * G is eigendecomposed once (after adding kGramJitter * max diag(G) to the diagonal) so
 * repeated projections cost two dense products plus a scalar root find.
 */
class EllipsoidProjector {
 public:
  EllipsoidProjector(const Eigen::MatrixXd& G, double r);

  /// Returns z unchanged when z' G z <= r. Otherwise the boundary point
  /// y = (I + mu G)^{-1} z, and writes mu to *multiplier when non-null.
  Eigen::VectorXd project(const Eigen::VectorXd& z, double* multiplier = nullptr) const;

  /// z' G z with the jittered G.
  double quadratic(const Eigen::VectorXd& z) const;

  int dim() const { return static_cast<int>(eigenvalues_.size()); }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double radius() const { return r_; }

 private:
  Eigen::MatrixXd basis_;
  Eigen::VectorXd eigenvalues_;
  double r_;
};

Eigen::VectorXd project_ellipsoid(const Eigen::VectorXd& z, const Eigen::MatrixXd& G, double r);

/**
 * Minimizes c.z subject to A z = b and both ellipsoid bounds.
 *
 * Linearly dependent rows are dropped first. Each block is whitened through its Gram
 * eigenbasis so the balls become spheres; for a fixed ratio of the two ball multipliers the
 * KKT point is y0 + e y1 (one QR), and the ratio is bisected in log space until both balls
 * bind at the same scale e (or one of them is slack). A few refinement rounds then reduce
 * ||A z - b||_inf; each is kept only when that merit drops.
 * Deterministic: no randomness, fixed reduction order.
 */
SolveResult solve(const FiniteProgram& p, const SolveOptions& opts = {});

/**
 * Recomputes ||A z - b||_inf, the step-1 projected-gradient norm of the Lagrangian
 * ||z - P(z - (c + A' lambda))||, and sum |ball multiplier * slack|.
 */
KktResiduals kkt_residuals(const FiniteProgram& p, const SolveResult& res);

}  // namespace okoc
