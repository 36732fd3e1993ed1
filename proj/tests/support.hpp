#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "okoc/expr.hpp"
#include "okoc/oracle.hpp"
#include "okoc/problem.hpp"

namespace testing {

inline okoc::Box box1(double lo, double hi) {
  return okoc::Box(Eigen::VectorXd::Constant(1, lo), Eigen::VectorXd::Constant(1, hi));
}

inline okoc::Box box(std::vector<double> lo, std::vector<double> hi) {
  return okoc::Box(Eigen::Map<Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size())),
                   Eigen::Map<Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size())));
}

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline std::vector<okoc::Expr> exprs(const std::vector<std::string>& src, int n, int m) {
  std::vector<okoc::Expr> out;
  for (const auto& s : src) out.push_back(okoc::parse(s, n, m));
  return out;
}

/// Scalar problem x' = f(t, x, u) on [0, T] with Gaussian kernels of unit shape.
inline okoc::ProblemSpec scalar_spec(const std::string& f, const std::string& h,
                                     const std::string& F, int m, double x0 = 1.0,
                                     double T = 1.0) {
  okoc::ProblemSpec spec;
  spec.n = 1;
  spec.m = m;
  spec.horizon = T;
  spec.x0 = vec({x0});
  spec.X = box1(-2.0, 2.0);
  spec.U = m ? box1(-1.0, 1.0) : okoc::Box(Eigen::VectorXd(0), Eigen::VectorXd(0));
  spec.D = spec.X;
  spec.dynamics = exprs({f}, 1, m);
  spec.running_cost = okoc::parse(h, 1, m);
  spec.terminal_cost = okoc::parse(F, 1, 0);
  spec.kernel_S = okoc::KernelConfig::gaussian(2 + m, 1.0);
  spec.kernel_Sigma = okoc::KernelConfig::gaussian(2, 1.0);
  spec.kernel_D = okoc::KernelConfig::gaussian(1, 1.0);
  return spec;
}

inline Eigen::VectorXd uniform_vec(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

/// Random piecewise-constant control with `segments` values drawn from [lo, hi]^m.
inline okoc::PiecewiseControl random_control(std::mt19937_64& rng, double T, int segments,
                                             int m, double lo, double hi) {
  std::vector<Eigen::VectorXd> values;
  for (int s = 0; s < segments; ++s) values.push_back(uniform_vec(rng, m, lo, hi));
  return okoc::PiecewiseControl::uniform(T, std::move(values));
}

}  // namespace testing
