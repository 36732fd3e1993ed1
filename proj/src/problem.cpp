#include "okoc/problem.hpp"

#include <string>

#include "okoc/errors.hpp"

namespace okoc {

Box::Box(Eigen::VectorXd lo, Eigen::VectorXd hi) : lower(std::move(lo)), upper(std::move(hi)) {
  if (lower.size() != upper.size()) throw ArgumentError("box bounds differ in dimension");
  if (!lower.allFinite() || !upper.allFinite()) throw ArgumentError("non-finite box bound");
  for (Eigen::Index i = 0; i < lower.size(); ++i) {
    if (!(lower(i) < upper(i))) {
      throw ArgumentError("box lower bound must be below upper bound in coordinate " +
                          std::to_string(i + 1));
    }
  }
}

bool Box::contains(Eigen::Ref<const Eigen::VectorXd> p, double tol) const {
  if (p.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) < lower(i) - tol || p(i) > upper(i) + tol) return false;
  }
  return true;
}

Box product(const std::vector<Box>& parts) {
  Eigen::Index dim = 0;
  for (const Box& b : parts) dim += b.dim();
  Eigen::VectorXd lo(dim);
  Eigen::VectorXd hi(dim);
  Eigen::Index offset = 0;
  for (const Box& b : parts) {
    lo.segment(offset, b.dim()) = b.lower;
    hi.segment(offset, b.dim()) = b.upper;
    offset += b.dim();
  }
  return Box(std::move(lo), std::move(hi));
}

Box ProblemSpec::time_box() const {
  return Box(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, horizon));
}

Box ProblemSpec::s_box() const { return product({time_box(), X, U}); }

Box ProblemSpec::sigma_box() const { return product({time_box(), X}); }

void ProblemSpec::validate() const {
  if (n < 1) throw ArgumentError("state dimension n must be >= 1");
  if (m < 0) throw ArgumentError("control dimension m must be >= 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ArgumentError("T must be positive");
  if (x0.size() != n) throw ArgumentError("x0 must have n entries");
  if (X.dim() != n || D.dim() != n) throw ArgumentError("X and D must be n-dimensional");
  if (U.dim() != m) throw ArgumentError("U must be m-dimensional");
  if (!X.contains(x0)) throw ArgumentError("x0 must lie in X");
  if (static_cast<int>(dynamics.size()) != n) {
    throw ArgumentError("dynamics must have n components");
  }
  auto check_sig = [&](const Expr& e, const char* what) {
    if (e.state_dim() != n || e.control_dim() != m) {
      throw ArgumentError(std::string(what) + " was parsed with a different signature");
    }
  };
  for (const Expr& f : dynamics) check_sig(f, "dynamics");
  check_sig(running_cost, "running cost");
  if (terminal_cost.state_dim() != n || terminal_cost.control_dim() != 0) {
    throw ArgumentError("terminal cost must be parsed with signature (n, 0)");
  }
  if (kernel_S.dim() != 1 + n + m) throw ArgumentError("kernel_S.dim must be 1+n+m");
  if (kernel_Sigma.dim() != 1 + n) throw ArgumentError("kernel_Sigma.dim must be 1+n");
  if (kernel_D.dim() != n) throw ArgumentError("kernel_D.dim must be n");
}

}  // namespace okoc
