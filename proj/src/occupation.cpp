#include "okoc/occupation.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "okoc/assembly.hpp"
#include "okoc/csv.hpp"
#include "okoc/errors.hpp"

namespace okoc {

Trajectory::Trajectory(double horizon, Eigen::MatrixXd states, Eigen::MatrixXd controls)
    : horizon_(horizon),
      states_(std::move(states)),
      controls_(std::move(controls)),
      controls_left_(controls_) {
  check();
}

Trajectory::Trajectory(double horizon, Eigen::MatrixXd states, Eigen::MatrixXd controls,
                       Eigen::MatrixXd controls_left)
    : horizon_(horizon),
      states_(std::move(states)),
      controls_(std::move(controls)),
      controls_left_(std::move(controls_left)) {
  check();
  if (controls_left_.rows() != controls_.rows() || controls_left_.cols() != controls_.cols()) {
    throw ArgumentError("left-limit controls must match the control matrix shape");
  }
  if (!controls_left_.allFinite()) throw ArgumentError("non-finite control sample");
  has_jumps_ = controls_left_ != controls_;
}

void Trajectory::check() const {
  if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) {
    throw ArgumentError("trajectory horizon must be positive");
  }
  const Eigen::Index nodes = states_.rows();
  if (nodes < 3 || (nodes - 1) % 2 != 0) {
    throw ArgumentError("trajectory needs an even number N >= 2 of steps, got " +
                        std::to_string(nodes - 1));
  }
  if (controls_.rows() != nodes) {
    throw ArgumentError("state and control sample counts differ");
  }
  if (!states_.allFinite() || !controls_.allFinite()) {
    throw ArgumentError("non-finite trajectory sample");
  }
}

Trajectory Trajectory::from_samples(const std::vector<double>& times, Eigen::MatrixXd states,
                                    Eigen::MatrixXd controls) {
  if (times.size() < 3) throw ArgumentError("trajectory needs at least 3 nodes");
  const double horizon = times.back();
  const int steps = static_cast<int>(times.size()) - 1;
  for (int k = 0; k <= steps; ++k) {
    if (std::abs(times[static_cast<std::size_t>(k)] - horizon * k / steps) > 1e-12 * horizon) {
      throw ArgumentError("trajectory time grid is not uniform from 0 (node " +
                          std::to_string(k) + ")");
    }
  }
  if (static_cast<Eigen::Index>(times.size()) != states.rows()) {
    throw ArgumentError("time and state sample counts differ");
  }
  return Trajectory(horizon, std::move(states), std::move(controls));
}

Eigen::VectorXd Trajectory::s_point(int k, bool from_left) const {
  Eigen::VectorXd p(1 + state_dim() + control_dim());
  p(0) = time(k);
  p.segment(1, state_dim()) = states_.row(k).transpose();
  p.tail(control_dim()) =
      (from_left ? controls_left_.row(k) : controls_.row(k)).transpose();
  return p;
}

Eigen::VectorXd Trajectory::sigma_point(int k) const {
  Eigen::VectorXd p(1 + state_dim());
  p(0) = time(k);
  p.tail(state_dim()) = states_.row(k).transpose();
  return p;
}

bool Trajectory::within(const Box& X, const Box& U) const {
  for (int k = 0; k <= steps(); ++k) {
    if (!X.contains(states_.row(k).transpose())) return false;
    if (!U.contains(controls_.row(k).transpose())) return false;
    if (!U.contains(controls_left_.row(k).transpose())) return false;
  }
  return true;
}

Eigen::VectorXd simpson_weights(int steps, double horizon) {
  if (steps < 2 || steps % 2 != 0) throw ArgumentError("Simpson rule needs an even N >= 2");
  const double h = horizon / steps;
  Eigen::VectorXd w(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    if (k == 0 || k == steps) {
      w(k) = h / 3.0;
    } else {
      w(k) = (k % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
    }
  }
  return w;
}

std::vector<QuadratureNode> quadrature_nodes(const Trajectory& traj) {
  const int n = traj.steps();
  const Eigen::VectorXd w = simpson_weights(n, traj.horizon());
  const double end_weight = traj.step() / 3.0;
  std::vector<QuadratureNode> nodes;
  nodes.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) {
    const bool interior_even = k > 0 && k < n && k % 2 == 0;
    const bool jump = traj.has_jumps() && traj.controls().row(k) != traj.controls_left().row(k);
    if (jump && interior_even) {
      nodes.push_back({k, true, end_weight});
      nodes.push_back({k, false, end_weight});
    } else {
      // Odd nodes sit inside a panel; a jump there cannot be split. The final node only
      // closes the last panel, so it takes the left limit.
      nodes.push_back({k, k == n, w(k)});
    }
  }
  return nodes;
}

namespace {

void check_s_kernel(const KernelConfig& kS, const Trajectory& traj) {
  if (kS.dim() != 1 + traj.state_dim() + traj.control_dim()) {
    throw ArgumentError("S-kernel dimension " + std::to_string(kS.dim()) +
                        " does not match 1+n+m = " +
                        std::to_string(1 + traj.state_dim() + traj.control_dim()));
  }
}

Eigen::MatrixXd quadrature_points(const Trajectory& traj,
                                  const std::vector<QuadratureNode>& nodes) {
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(nodes.size()),
                      1 + traj.state_dim() + traj.control_dim());
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    pts.row(static_cast<Eigen::Index>(q)) =
        traj.s_point(nodes[q].node, nodes[q].from_left).transpose();
  }
  return pts;
}

}  // namespace

double occupation_eval(const KernelConfig& kS, const Trajectory& traj,
                       Eigen::Ref<const Eigen::VectorXd> y) {
  check_s_kernel(kS, traj);
  if (y.size() != kS.dim()) throw ArgumentError("evaluation point dimension mismatch");
  if (!y.allFinite()) throw ArgumentError("non-finite evaluation point");
  const auto nodes = quadrature_nodes(traj);
  const Eigen::MatrixXd pts = quadrature_points(traj, nodes);
  double sum = 0.0;
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    sum += nodes[q].weight *
           kS.profile((pts.row(static_cast<Eigen::Index>(q)).transpose() - y).squaredNorm());
  }
  return sum;
}

double occupation_norm_sq(const KernelConfig& kS, const Trajectory& traj) {
  check_s_kernel(kS, traj);
  const auto nodes = quadrature_nodes(traj);
  const Eigen::MatrixXd pts = quadrature_points(traj, nodes);
  const auto count = static_cast<Eigen::Index>(nodes.size());
  const double diag = kS.profile(0.0);
  double total = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    const double wi = nodes[static_cast<std::size_t>(i)].weight;
    double row = 0.0;
    for (Eigen::Index j = i + 1; j < count; ++j) {
      row += nodes[static_cast<std::size_t>(j)].weight *
             kS.profile((pts.row(i) - pts.row(j)).squaredNorm());
    }
    total += wi * (2.0 * row + wi * diag);
  }
  return total;
}

double inner_with_function(const Expr& h, const Trajectory& traj) {
  if (h.state_dim() != traj.state_dim() || h.control_dim() != traj.control_dim()) {
    throw ArgumentError("expression signature does not match the trajectory");
  }
  double sum = 0.0;
  for (const QuadratureNode& q : quadrature_nodes(traj)) {
    const Eigen::VectorXd x = traj.state(q.node);
    const Eigen::VectorXd u = (q.from_left ? traj.controls_left() : traj.controls())
                                  .row(q.node)
                                  .transpose();
    sum += q.weight * h.eval(traj.time(q.node), std::span<const double>(x.data(), x.size()),
                             std::span<const double>(u.data(), u.size()));
  }
  return sum;
}

double adjoint_identity_residual(const KernelConfig& kSigma, std::span<const Expr> f,
                                 const Trajectory& traj,
                                 Eigen::Ref<const Eigen::VectorXd> center) {
  const int n = traj.state_dim();
  if (kSigma.dim() != 1 + n) throw ArgumentError("Sigma-kernel dimension must be 1+n");
  if (center.size() != 1 + n) throw ArgumentError("center dimension must be 1+n");
  if (static_cast<int>(f.size()) != n) throw ArgumentError("dynamics must have n components");

  double integral = 0.0;
  Eigen::VectorXd fx(n);
  for (const QuadratureNode& q : quadrature_nodes(traj)) {
    const Eigen::VectorXd x = traj.state(q.node);
    const Eigen::VectorXd u = (q.from_left ? traj.controls_left() : traj.controls())
                                  .row(q.node)
                                  .transpose();
    const double t = traj.time(q.node);
    eval_all(f, t, std::span<const double>(x.data(), x.size()),
             std::span<const double>(u.data(), u.size()), std::span<double>(fx.data(), n));
    integral += q.weight * apply_total_derivative(kSigma, center, traj.sigma_point(q.node), fx);
  }
  const double boundary = eval(kSigma, traj.sigma_point(traj.steps()), center) -
                          eval(kSigma, traj.sigma_point(0), center);
  return std::abs(integral - boundary);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t";
  for (int i = 1; i <= traj.state_dim(); ++i) out << ",x" << i;
  for (int i = 1; i <= traj.control_dim(); ++i) out << ",u" << i;
  out << '\n';
  for (int k = 0; k <= traj.steps(); ++k) {
    out << csv::format_double(traj.time(k));
    for (int i = 0; i < traj.state_dim(); ++i) out << ',' << csv::format_double(traj.states()(k, i));
    for (int i = 0; i < traj.control_dim(); ++i) {
      out << ',' << csv::format_double(traj.controls()(k, i));
    }
    out << '\n';
  }
}

Trajectory read_trajectory_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("empty trajectory CSV");
  const std::vector<std::string> header = csv::split(line);
  if (header.empty() || header[0] != "t") throw ArgumentError("CSV header must start with 't'");
  int n = 0;
  int m = 0;
  for (std::size_t c = 1; c < header.size(); ++c) {
    const std::string expect_x = "x" + std::to_string(n + 1);
    const std::string expect_u = "u" + std::to_string(m + 1);
    if (m == 0 && header[c] == expect_x) {
      ++n;
    } else if (header[c] == expect_u) {
      ++m;
    } else {
      throw ArgumentError("unexpected CSV column '" + header[c] + "'");
    }
  }

  std::vector<double> times;
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = csv::split(line);
    if (cells.size() != header.size()) {
      throw ArgumentError("CSV line " + std::to_string(line_no) + " has " +
                          std::to_string(cells.size()) + " fields, expected " +
                          std::to_string(header.size()));
    }
    std::vector<double> values;
    values.reserve(cells.size());
    for (const std::string& cell : cells) values.push_back(csv::parse_double(cell, line_no));
    times.push_back(values[0]);
    rows.push_back(std::move(values));
  }
  const auto count = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd states(count, n);
  Eigen::MatrixXd controls(count, m);
  for (Eigen::Index k = 0; k < count; ++k) {
    const auto& r = rows[static_cast<std::size_t>(k)];
    for (int i = 0; i < n; ++i) states(k, i) = r[static_cast<std::size_t>(1 + i)];
    for (int i = 0; i < m; ++i) controls(k, i) = r[static_cast<std::size_t>(1 + n + i)];
  }
  return Trajectory::from_samples(times, std::move(states), std::move(controls));
}

}  // namespace okoc
