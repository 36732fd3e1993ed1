#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "okoc/expr.hpp"
#include "okoc/kernels.hpp"
#include "okoc/problem.hpp"

namespace okoc {

/**
 * @brief A state/control signal sampled on the uniform grid t_k = k T / N, N even.
 *
 * Controls are stored right-continuous at each node. Piecewise-constant signals whose jumps
 * fall on even nodes also carry the left limit there, so that every Simpson panel sees a
 * smooth integrand. Without explicit left limits the signal is taken to be continuous.
 */
class Trajectory {
 public:
  /// states: (N+1) x n, controls: (N+1) x m.
  Trajectory(double horizon, Eigen::MatrixXd states, Eigen::MatrixXd controls);
  Trajectory(double horizon, Eigen::MatrixXd states, Eigen::MatrixXd controls,
             Eigen::MatrixXd controls_left);

  /// Rejects time grids that are not uniform within 1e-12 T or do not start at 0.
  static Trajectory from_samples(const std::vector<double>& times, Eigen::MatrixXd states,
                                 Eigen::MatrixXd controls);

  int steps() const { return static_cast<int>(states_.rows()) - 1; }
  double horizon() const { return horizon_; }
  double step() const { return horizon_ / steps(); }
  double time(int k) const { return horizon_ * k / steps(); }
  int state_dim() const { return static_cast<int>(states_.cols()); }
  int control_dim() const { return static_cast<int>(controls_.cols()); }

  const Eigen::MatrixXd& states() const { return states_; }
  const Eigen::MatrixXd& controls() const { return controls_; }
  const Eigen::MatrixXd& controls_left() const { return controls_left_; }

  Eigen::VectorXd state(int k) const { return states_.row(k).transpose(); }
  Eigen::VectorXd control(int k) const { return controls_.row(k).transpose(); }

  /// (t_k, x_k, u_k) in S. With from_left, u is the left limit at node k.
  Eigen::VectorXd s_point(int k, bool from_left = false) const;
  /// (t_k, x_k) in Sigma.
  Eigen::VectorXd sigma_point(int k) const;

  bool has_jumps() const { return has_jumps_; }
  bool within(const Box& X, const Box& U) const;

 private:
  void check() const;

  double horizon_;
  Eigen::MatrixXd states_;
  Eigen::MatrixXd controls_;
  Eigen::MatrixXd controls_left_;
  bool has_jumps_ = false;
};

/// Composite Simpson weights on N+1 uniform nodes over [0, T].
Eigen::VectorXd simpson_weights(int steps, double horizon);

/// One term of the composite Simpson rule. At a jump node the two adjacent panels see
/// different control values, so the node appears twice (once per side).
struct QuadratureNode {
  int node;
  bool from_left;
  double weight;
};

std::vector<QuadratureNode> quadrature_nodes(const Trajectory& traj);

/// Gamma(y) = int_0^T K_S(y, (t, x(t), u(t))) dt.
double occupation_eval(const KernelConfig& kS, const Trajectory& traj,
                       Eigen::Ref<const Eigen::VectorXd> y);

/// ||Gamma||^2 = int int K_S((tau, x(tau), u(tau)), (t, x(t), u(t))) dtau dt.
double occupation_norm_sq(const KernelConfig& kS, const Trajectory& traj);

/// int_0^T h(t, x(t), u(t)) dt.
double inner_with_function(const Expr& h, const Trajectory& traj);

/**
 * |int_0^T (A_f g)(t, x(t), u(t)) dt - (g(T, x(T)) - g(0, x(0)))| for g = K_Sigma(., center).
 * Vanishes (up to quadrature error) only when traj solves x' = f(t, x, u).
 */
double adjoint_identity_residual(const KernelConfig& kSigma, std::span<const Expr> f,
                                 const Trajectory& traj, Eigen::Ref<const Eigen::VectorXd> center);

/// CSV with header t,x1..xn,u1..um and one row per node.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);

}  // namespace okoc
