// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "grid_oracle.hpp"
#include "okoc/assembly.hpp"
#include "okoc/commands.hpp"
#include "okoc/kernels.hpp"
#include "okoc/occupation.hpp"
#include "okoc/oracle.hpp"
#include "okoc/problem_file.hpp"
#include "okoc/solver.hpp"
#include "support.hpp"

using namespace okoc;
using testing::vec;

namespace {

const std::string kData = OKOC_DATA_DIR;
constexpr double kLqValue = 0.761594;

struct Outcome {
  bool pass = false;
  std::string detail;
  std::vector<double> numbers;  // compared bit for bit by the determinism criterion
  double seconds = 0.0;
  double budget = 0.0;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

Outcome adjoint_identity() {
  const auto f = testing::exprs({"-x1 + u1"}, 1, 1);
  const PiecewiseControl u(testing::exprs({"sin(t)"}, 1, 0));
  const auto k = KernelConfig::gaussian(2, 1.0);
  const Eigen::VectorXd x0 = vec({1.0});
  const Trajectory t400 = simulate(f, x0, u, 1.0, 400);
  const Trajectory t800 = simulate(f, x0, u, 1.0, 800);
  std::mt19937_64 rng(1);
  double max400 = 0.0;
  double max800 = 0.0;
  Outcome o;
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd c = vec({testing::uniform_vec(rng, 1, 0.0, 1.0)(0),
                                   testing::uniform_vec(rng, 1, -1.0, 2.0)(0)});
    const double r4 = adjoint_identity_residual(k, f, t400, c);
    const double r8 = adjoint_identity_residual(k, f, t800, c);
    max400 = std::max(max400, r4);
    max800 = std::max(max800, r8);
    o.numbers.push_back(r4);
    o.numbers.push_back(r8);
  }
  const double ratio = max800 / max400;
  o.pass = max400 <= 1e-4 && ratio <= 1.0 / 8.0;
  o.detail = "max residual N=400 " + fmt(max400) + ", N=800 " + fmt(max800) + ", ratio " + fmt(ratio);
  o.budget = 5.0;
  return o;
}

Outcome occupation_bound() {
  const auto f = testing::exprs({"-x1 + u1"}, 1, 1);
  const KernelConfig kernels[] = {KernelConfig::gaussian(3, 1.0), KernelConfig::wendland_c2(3, 1.5),
                                  KernelConfig::wendland_c4(3, 1.5)};
  std::mt19937_64 rng(2);
  Outcome o;
  double worst = 0.0;
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    const auto u = testing::random_control(rng, 1.0, 1 + i % 5, 1, -1.0, 1.0);
    const Trajectory traj = simulate(f, vec({testing::uniform_vec(rng, 1, -1.0, 1.0)(0)}), u, 1.0, 200);
    for (const auto& k : kernels) {
      const double norm = occupation_norm_sq(k, traj);
      const double bound = phi0(k);  // T = 1
      worst = std::max(worst, norm / bound);
      violations += norm > bound * (1.0 + 1e-8);
      o.numbers.push_back(norm);
    }
  }
  o.pass = violations == 0;
  o.detail = "largest ||Gamma||^2 / (T^2 Phi(0)) " + fmt(worst) + ", violations " + std::to_string(violations);
  o.budget = 30.0;
  return o;
}

Outcome gram_psd() {
  std::mt19937_64 rng(3);
  Outcome o;
  double lowest = std::numeric_limits<double>::infinity();
  for (KernelFamily family : {KernelFamily::Gaussian, KernelFamily::WendlandC2, KernelFamily::WendlandC4}) {
    for (int s = 0; s < 20; ++s) {
      const int dim = 1 + s % 4;
      const int count = 10 + static_cast<int>(testing::uniform_vec(rng, 1, 0.0, 190.0)(0));
      const KernelConfig k(family, testing::uniform_vec(rng, 1, 0.1, 2.0)(0),
                           testing::uniform_vec(rng, 1, 0.3, 2.0)(0), dim);
      Eigen::MatrixXd pts(count, dim);
      for (int i = 0; i < count; ++i) pts.row(i) = testing::uniform_vec(rng, dim, -1.0, 1.0).transpose();
      const Eigen::MatrixXd G = jittered(gram(k, pts), phi0(k));
      const double m = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .minCoeff();
      lowest = std::min(lowest, m);
      o.numbers.push_back(m);
    }
  }
  o.pass = lowest >= -1e-8;
  o.detail = "smallest eigenvalue " + fmt(lowest);
  o.budget = 10.0;
  return o;
}

double feasibility_residual(int N, std::vector<double>& numbers) {
  ProblemSpec spec = testing::scalar_spec("-x1", "x1^2", "0", 0);
  const auto none = PiecewiseControl::uniform(1.0, {Eigen::VectorXd(0)});
  const Trajectory tr = simulate(spec.dynamics, spec.x0, none, 1.0, N);
  CenterSet cs = generate_centers(spec, N + 1, 1, 100, CenterStrategy::Halton, 0);
  for (int k = 0; k <= N; ++k) cs.s_centers.row(k) = tr.s_point(k).transpose();
  cs.d_centers = tr.state(N).transpose();
  const FiniteProgram p = assemble(spec, cs);
  Eigen::VectorXd z(N + 2);
  z << simpson_weights(N, 1.0), 1.0;
  const double r = (p.A * z - p.b).cwiseAbs().maxCoeff();
  numbers.push_back(r);
  return r;
}

Outcome empirical_feasibility() {
  Outcome o;
  const double r100 = feasibility_residual(100, o.numbers);
  const double r200 = feasibility_residual(200, o.numbers);
  o.pass = r200 <= 5e-3 && r100 / r200 >= 8.0;
  o.detail = "||A w - b||_inf N=100 " + fmt(r100) + ", N=200 " + fmt(r200) + ", shrink " + fmt(r100 / r200) + "x";
  o.budget = 10.0;
  return o;
}

Outcome solver_vs_oracle() {
  std::mt19937_64 rng(5);
  Outcome o;
  double worst_gap = 0.0;
  double worst_kkt = 0.0;
  int optimal = 0;
  for (int i = 0; i < 50; ++i) {
    const int n = 1 + i % 3;
    const int MS = 1 + (i / 3) % n;
    const int MD = n - MS;
    const int rows = std::min((i / 3) % 3, n - 1);
    const FiniteProgram p = testing::random_small_program(rng, MS, MD, rows);
    const SolveResult r = solve(p);
    worst_gap = std::max(worst_gap, std::abs(r.objective - testing::grid_oracle(p)));
    if (r.status == SolveStatus::Optimal) {
      ++optimal;
      const KktResiduals k = kkt_residuals(p, r);
      worst_kkt = std::max({worst_kkt, k.eq_residual_inf, k.stationarity, k.complementarity});
    }
    o.numbers.push_back(r.objective);
  }
  o.pass = worst_gap <= 5e-3 && worst_kkt <= 1e-6;
  o.detail = "worst |objective - grid| " + fmt(worst_gap) + ", optimal " + std::to_string(optimal) +
             "/50, worst KKT residual " + fmt(worst_kkt);
  o.budget = 60.0;
  return o;
}

struct LqRun {
  ProblemConfig config;
  SolveRun run;
};

LqRun lq_solve(int M_S) {
  ProblemConfig config = load_problem_file(kData + "/lq.json");
  config.centers.M_S = M_S;
  return {config, run_solve(config, false)};
}

Outcome lq_benchmark(std::function<void(const LqRun&)> keep) {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  LqRun main = lq_solve(600);
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double obj = main.run.result.objective;
  o.numbers = {obj, main.run.result.eq_residual_inf};
  std::string study;
  for (int ms : {300, 1200}) {
    const double v = lq_solve(ms).run.result.objective;
    study += " M_S=" + std::to_string(ms) + ": " + fmt(v) + ";";
    o.numbers.push_back(v);
  }
  o.pass = std::abs(obj - kLqValue) <= 0.15 && o.seconds < 120.0;
  o.detail = "objective " + fmt(obj) + " (target " + fmt(kLqValue) + " +- 0.15), status " +
             std::string(to_string(main.run.result.status)) + ", solve " + fmt(o.seconds) +
             " s; center study" + study;
  o.budget = -1.0;  // timed on the main solve only
  keep(main);
  return o;
}

/// The trajectory of the best enumerated control, embedded through each kernel's Gram system
/// and projected into the balls.
Outcome candidate_dominance(const LqRun& lq) {
  Outcome o;
  const ProblemSpec& spec = lq.config.spec;
  const BruteForceResult best =
      brute_force_cost(spec, {-1.0, -0.75, -0.5, -0.25, 0.0}, 3, 50);
  const Trajectory traj = simulate(spec.dynamics, spec.x0, best.best_control, spec.horizon, 150);
  const FiniteProgram& p = lq.run.program;
  const CenterSet& cs = lq.run.centers;

  Eigen::VectorXd gamma(p.size_S());
  for (int i = 0; i < p.size_S(); ++i) {
    gamma(i) = occupation_eval(spec.kernel_S, traj, cs.s_centers.row(i).transpose());
  }
  const Eigen::VectorXd xT = traj.state(traj.steps());
  Eigen::VectorXd delta(p.size_D());
  for (int i = 0; i < p.size_D(); ++i) delta(i) = eval(spec.kernel_D, cs.d_centers.row(i).transpose(), xT);
  const Eigen::VectorXd w = project_ellipsoid(
      jittered(p.G_S, phi0(spec.kernel_S)).ldlt().solve(gamma), p.G_S, p.r_S);
  const Eigen::VectorXd v = project_ellipsoid(
      jittered(p.G_D, phi0(spec.kernel_D)).ldlt().solve(delta), p.G_D, p.r_D);
  Eigen::VectorXd z(p.cols());
  z << w, v;
  const double cand = p.c.dot(z);
  const double obj = lq.run.result.objective;
  const double slack = 1e-4 * (1.0 + p.c.norm());
  o.numbers = {best.best_cost, cand, obj};
  o.pass = obj <= cand + slack;
  o.detail = "solver " + fmt(obj) + " <= candidate " + fmt(cand) + " + " + fmt(slack) +
             " (enumerated trajectory cost " + fmt(best.best_cost) + ")";
  o.budget = 30.0;
  return o;
}

std::vector<Outcome> run_all(bool print) {
  std::vector<Outcome> out;
  const char* names[] = {"adjoint identity", "occupation-norm bound", "Gram PSD",
                         "empirical feasibility", "solver vs grid oracle", "LQ benchmark",
                         "candidate dominance"};
  LqRun lq;
  auto timed = [&](std::function<Outcome()> f) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o = f();
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.budget > 0.0) {
      o.seconds = s;
      if (s >= o.budget) {
        o.pass = false;
        o.detail += "; over the " + fmt(o.budget) + " s budget";
      }
    }
    const auto idx = out.size();
    if (print) {
      std::cout << "criterion " << idx + 1 << " (" << names[idx] << "): " << (o.pass ? "PASS" : "FAIL")
                << "  " << o.detail << "  [" << fmt(o.seconds) << " s]" << std::endl;
    }
    out.push_back(std::move(o));
  };
  timed(adjoint_identity);
  timed(occupation_bound);
  timed(gram_psd);
  timed(empirical_feasibility);
  timed(solver_vs_oracle);
  timed([&] { return lq_benchmark([&](const LqRun& r) { lq = r; }); });
  timed([&] { return candidate_dominance(lq); });
  return out;
}

bool identical(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

}  // namespace

int main() {
  const std::vector<Outcome> first = run_all(true);
  const std::vector<Outcome> second = run_all(false);
  int mismatched = 0;
  for (std::size_t i = 0; i < first.size(); ++i) mismatched += !identical(first[i].numbers, second[i].numbers);
  const bool det = mismatched == 0;
  std::cout << "criterion 8 (determinism): " << (det ? "PASS" : "FAIL") << "  " << mismatched
            << " of 7 criteria changed on rerun" << std::endl;

  int failed = det ? 0 : 1;
  for (const Outcome& o : first) failed += !o.pass;
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed"))
            << std::endl;
  return failed ? 1 : 0;
}
