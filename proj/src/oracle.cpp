#include "okoc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "okoc/errors.hpp"

namespace okoc {

PiecewiseControl::PiecewiseControl(std::vector<double> breakpoints,
                                   std::vector<Eigen::VectorXd> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.empty()) throw ArgumentError("a piecewise control needs at least one segment");
  if (breakpoints_.size() != values_.size() + 1) {
    throw ArgumentError("breakpoints must number segments + 1");
  }
  if (breakpoints_.front() != 0.0) throw ArgumentError("breakpoints must start at 0");
  for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
    if (!(breakpoints_[i] > breakpoints_[i - 1])) {
      throw ArgumentError("breakpoints must be strictly increasing");
    }
  }
  for (const auto& v : values_) {
    if (v.size() != values_.front().size()) throw ArgumentError("segment values differ in size");
    if (!v.allFinite()) throw ArgumentError("non-finite control value");
  }
}

PiecewiseControl::PiecewiseControl(std::vector<Expr> law) : law_(std::move(law)) {
  for (const Expr& e : *law_) {
    if (e.control_dim() != 0) throw ArgumentError("a control law must have signature (n, 0)");
  }
}

PiecewiseControl PiecewiseControl::uniform(double horizon, std::vector<Eigen::VectorXd> values) {
  std::vector<double> bp(values.size() + 1);
  for (std::size_t i = 0; i < bp.size(); ++i) {
    bp[i] = horizon * static_cast<double>(i) / static_cast<double>(values.size());
  }
  bp.back() = horizon;
  return PiecewiseControl(std::move(bp), std::move(values));
}

int PiecewiseControl::control_dim() const {
  if (law_) return static_cast<int>(law_->size());
  return static_cast<int>(values_.front().size());
}

int PiecewiseControl::segment_at(double t) const {
  const auto it = std::upper_bound(breakpoints_.begin() + 1, breakpoints_.end() - 1, t);
  return static_cast<int>(it - (breakpoints_.begin() + 1));
}

Eigen::VectorXd PiecewiseControl::value(double t, const Eigen::VectorXd& x) const {
  if (!law_) return values_[static_cast<std::size_t>(segment_at(t))];
  Eigen::VectorXd u(static_cast<Eigen::Index>(law_->size()));
  for (std::size_t i = 0; i < law_->size(); ++i) {
    u(static_cast<Eigen::Index>(i)) =
        (*law_)[i].eval(t, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                        {});
  }
  return u;
}

Trajectory simulate(std::span<const Expr> f, const Eigen::VectorXd& x0, const PiecewiseControl& u,
                    double horizon, int steps) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  const int m = u.control_dim();
  if (static_cast<Eigen::Index>(f.size()) != n) throw ArgumentError("dynamics must have n entries");
  if (steps < 2 || steps % 2 != 0) throw ArgumentError("step count must be even and >= 2");
  if (!(horizon > 0.0)) throw ArgumentError("horizon must be positive");
  if (!u.is_law() && std::abs(u.breakpoints().back() - horizon) > 1e-12 * horizon) {
    throw ArgumentError("control breakpoints must end at the horizon");
  }
  for (const Expr& e : f) {
    if (e.state_dim() != n || e.control_dim() != m) {
      throw ArgumentError("dynamics signature does not match (x0, u)");
    }
  }

  const double h = horizon / steps;
  Eigen::MatrixXd states(steps + 1, n);
  Eigen::MatrixXd controls(steps + 1, m);
  Eigen::MatrixXd controls_left(steps + 1, m);

  auto rhs = [&](double t, const Eigen::VectorXd& x, const Eigen::VectorXd& uval) {
    Eigen::VectorXd dx(n);
    eval_all(f, t, std::span<const double>(x.data(), static_cast<std::size_t>(n)),
             std::span<const double>(uval.data(), static_cast<std::size_t>(m)),
             std::span<double>(dx.data(), static_cast<std::size_t>(n)));
    return dx;
  };

  Eigen::VectorXd x = x0;
  states.row(0) = x.transpose();
  for (int k = 0; k < steps; ++k) {
    const double t = horizon * k / steps;
    Eigen::VectorXd k1, k2, k3, k4;
    try {
      if (u.is_law()) {
        const Eigen::VectorXd u0 = u.value(t, x);
        controls.row(k) = u0.transpose();
        if (k == 0) controls_left.row(0) = u0.transpose();
        k1 = rhs(t, x, u0);
        const Eigen::VectorXd x2 = x + 0.5 * h * k1;
        k2 = rhs(t + 0.5 * h, x2, u.value(t + 0.5 * h, x2));
        const Eigen::VectorXd x3 = x + 0.5 * h * k2;
        k3 = rhs(t + 0.5 * h, x3, u.value(t + 0.5 * h, x3));
        const Eigen::VectorXd x4 = x + h * k3;
        k4 = rhs(t + h, x4, u.value(t + h, x4));
      } else {
        const Eigen::VectorXd useg = u.values()[static_cast<std::size_t>(
            u.segment_at(t + 0.5 * h))];
        controls.row(k) = useg.transpose();
        if (k == 0) controls_left.row(0) = useg.transpose();
        controls_left.row(k + 1) = useg.transpose();
        k1 = rhs(t, x, useg);
        k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1, useg);
        k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2, useg);
        k4 = rhs(t + h, x + h * k3, useg);
      }
    } catch (const EvalError& e) {
      throw SimulationError(std::string("dynamics failed near node ") + std::to_string(k) + ": " +
                                e.what(),
                            k);
    }
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite()) {
      throw SimulationError("non-finite state at node " + std::to_string(k + 1), k + 1);
    }
    states.row(k + 1) = x.transpose();
  }

  if (u.is_law()) {
    try {
      controls.row(steps) = u.value(horizon, x).transpose();
    } catch (const EvalError& e) {
      throw SimulationError(std::string("control law failed at the final node: ") + e.what(),
                            steps);
    }
    for (int k = 1; k <= steps; ++k) controls_left.row(k) = controls.row(k);
  } else {
    controls.row(steps) = controls_left.row(steps);
  }
  return Trajectory(horizon, std::move(states), std::move(controls), std::move(controls_left));
}

double trajectory_cost(const Trajectory& traj, const Expr& h, const Expr& F) {
  if (F.state_dim() != traj.state_dim()) throw ArgumentError("terminal cost signature mismatch");
  const Eigen::VectorXd xT = traj.state(traj.steps());
  const Eigen::VectorXd none = Eigen::VectorXd::Zero(F.control_dim());
  return inner_with_function(h, traj) +
         F.eval(traj.horizon(), std::span<const double>(xT.data(), static_cast<std::size_t>(xT.size())),
                std::span<const double>(none.data(), static_cast<std::size_t>(none.size())));
}

double riccati_lq_cost(double a, double bb, double q, double r, double horizon, double x0) {
  if (!(r > 0.0)) throw ArgumentError("r must be positive");
  if (q < 0.0) throw ArgumentError("q must be non-negative");
  if (!(horizon > 0.0)) throw ArgumentError("horizon must be positive");
  constexpr int kSteps = 2000;
  // In reversed time s = T - t: dp/ds = q + 2 a p - p^2 bb^2 / r, p(0) = 0.
  auto dp = [&](double p) { return q + 2.0 * a * p - p * p * bb * bb / r; };
  const double h = horizon / kSteps;
  double p = 0.0;
  for (int k = 0; k < kSteps; ++k) {
    const double k1 = dp(p);
    const double k2 = dp(p + 0.5 * h * k1);
    const double k3 = dp(p + 0.5 * h * k2);
    const double k4 = dp(p + h * k3);
    p += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return p * x0 * x0;
}

BruteForceResult brute_force_cost(const ProblemSpec& spec, std::vector<double> levels,
                                  int segments, int steps_per_segment) {
  if (levels.empty()) throw ArgumentError("at least one control level is required");
  if (segments < 1) throw ArgumentError("segments must be >= 1");
  if (steps_per_segment < 1 || (segments * steps_per_segment) % 2 != 0) {
    throw ArgumentError("segments * steps_per_segment must be a positive even number");
  }
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  const int slots = segments * spec.m;
  const double count_d = std::pow(static_cast<double>(levels.size()), slots);
  if (count_d > 1e6) {
    throw ArgumentError("enumeration guard: " + std::to_string(levels.size()) + "^" +
                        std::to_string(slots) + " candidates exceed 1e6");
  }
  const auto count = static_cast<long long>(std::llround(count_d));
  const auto L = static_cast<long long>(levels.size());

  std::vector<int> digits(static_cast<std::size_t>(slots), 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_digits = digits;
  auto control_of = [&](const std::vector<int>& d) {
    std::vector<Eigen::VectorXd> vals(static_cast<std::size_t>(segments),
                                      Eigen::VectorXd(spec.m));
    for (int s = 0; s < segments; ++s) {
      for (int j = 0; j < spec.m; ++j) {
        vals[static_cast<std::size_t>(s)](j) =
            levels[static_cast<std::size_t>(d[static_cast<std::size_t>(s * spec.m + j)])];
      }
    }
    return PiecewiseControl::uniform(spec.horizon, std::move(vals));
  };

  for (long long c = 0; c < count; ++c) {
    // digits enumerate in lexicographic order, first slot most significant
    long long rem = c;
    for (int s = slots - 1; s >= 0; --s) {
      digits[static_cast<std::size_t>(s)] = static_cast<int>(rem % L);
      rem /= L;
    }
    const Trajectory traj = simulate(spec.dynamics, spec.x0, control_of(digits), spec.horizon,
                                     segments * steps_per_segment);
    const double cost = trajectory_cost(traj, spec.running_cost, spec.terminal_cost);
    if (cost < best) {
      best = cost;
      best_digits = digits;
    }
  }
  return {best, control_of(best_digits), count};
}

}  // namespace okoc
