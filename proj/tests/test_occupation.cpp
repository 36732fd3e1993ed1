#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "okoc/assembly.hpp"
#include "okoc/errors.hpp"
#include "okoc/occupation.hpp"
#include "okoc/oracle.hpp"
#include "support.hpp"

using namespace okoc;
using testing::vec;

namespace {

Trajectory constant_trajectory(double T, int N, double x, double u) {
  return Trajectory(T, Eigen::MatrixXd::Constant(N + 1, 1, x), Eigen::MatrixXd::Constant(N + 1, 1, u));
}

Trajectory line_trajectory(int N) {
  Eigen::MatrixXd states(N + 1, 1);
  for (int k = 0; k <= N; ++k) states(k, 0) = static_cast<double>(k) / N;
  return Trajectory(1.0, states, Eigen::MatrixXd::Zero(N + 1, 1));
}

Trajectory decay_trajectory(int N) {
  const auto f = testing::exprs({"-x1 + u1"}, 1, 1);
  return simulate(f, vec({1.0}), PiecewiseControl({parse("sin(t)", 1, 0)}), 1.0, N);
}

}  // namespace

TEST_CASE("trajectory invariants") {
  CHECK_THROWS_AS(Trajectory(1.0, Eigen::MatrixXd::Zero(4, 1), Eigen::MatrixXd::Zero(4, 1)),
                  ArgumentError);
  CHECK_THROWS_AS(Trajectory(1.0, Eigen::MatrixXd::Zero(2, 1), Eigen::MatrixXd::Zero(2, 1)),
                  ArgumentError);
  CHECK_THROWS_AS(Trajectory(0.0, Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Zero(3, 1)),
                  ArgumentError);
  CHECK_THROWS_AS(Trajectory(1.0, Eigen::MatrixXd::Zero(3, 1), Eigen::MatrixXd::Zero(5, 1)),
                  ArgumentError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 1);
  bad(1, 0) = std::nan("");
  CHECK_THROWS_AS(Trajectory(1.0, bad, Eigen::MatrixXd::Zero(3, 1)), ArgumentError);

  CHECK_NOTHROW(Trajectory::from_samples({0.0, 0.5, 1.0}, Eigen::MatrixXd::Zero(3, 1),
                                         Eigen::MatrixXd::Zero(3, 0)));
  CHECK_THROWS_AS(Trajectory::from_samples({0.0, 0.4, 1.0}, Eigen::MatrixXd::Zero(3, 1),
                                           Eigen::MatrixXd::Zero(3, 0)),
                  ArgumentError);
  CHECK_THROWS_AS(Trajectory::from_samples({0.1, 0.5, 0.9}, Eigen::MatrixXd::Zero(3, 1),
                                           Eigen::MatrixXd::Zero(3, 0)),
                  ArgumentError);

  const Trajectory tr = constant_trajectory(2.0, 4, 0.5, 0.0);
  CHECK(tr.within(testing::box1(0.0, 1.0), testing::box1(-1.0, 1.0)));
  CHECK_FALSE(tr.within(testing::box1(0.6, 1.0), testing::box1(-1.0, 1.0)));
  CHECK(tr.step() == 0.5);
  CHECK(tr.s_point(2) == vec({1.0, 0.5, 0.0}));
}

TEST_CASE("simpson weights integrate cubics exactly") {
  const Eigen::VectorXd w = simpson_weights(6, 3.0);
  CHECK(w.sum() == doctest::Approx(3.0).epsilon(1e-15));
  double cubic = 0.0;
  for (int k = 0; k <= 6; ++k) cubic += w(k) * std::pow(0.5 * k, 3);
  CHECK(cubic == doctest::Approx(81.0 / 4.0).epsilon(1e-14));
  CHECK_THROWS_AS(simpson_weights(3, 1.0), ArgumentError);
}

TEST_CASE("occupation eval of a constant trajectory") {
  const Trajectory tr = constant_trajectory(2.0, 400, 0.3, -0.4);
  CHECK(occupation_eval(KernelConfig::gaussian(3, 1e6), tr, vec({0.0, 0.3, -0.4})) ==
        doctest::Approx(2.0).epsilon(1e-5));
  // exp(-t^2) integrated over [0, 2]
  const double expected = std::sqrt(M_PI) / 2.0 * std::erf(2.0);
  CHECK(occupation_eval(KernelConfig::gaussian(3, 1.0), tr, vec({0.0, 0.3, -0.4})) ==
        doctest::Approx(expected).epsilon(1e-9));
  CHECK_THROWS_AS(occupation_eval(KernelConfig::gaussian(2, 1.0), tr, vec({0.0, 0.3})),
                  ArgumentError);
}

TEST_CASE("occupation eval along a straight line") {
  // int_0^1 exp(-2 t^2) dt, reference from a 20001-node Simpson rule.
  const double pinned = 0.5981440066613041;
  CHECK(occupation_eval(KernelConfig::gaussian(3, 1.0), line_trajectory(400), vec({0.0, 0.0, 0.0})) ==
        doctest::Approx(pinned).epsilon(1e-10));
}

TEST_CASE("occupation norm of a constant trajectory is T squared") {
  const Trajectory tr = constant_trajectory(2.0, 40, 0.1, 0.2);
  // the time coordinate still varies, so only a flat kernel gives exactly T^2
  CHECK(occupation_norm_sq(KernelConfig::gaussian(3, 1e12), tr) == doctest::Approx(4.0).epsilon(1e-10));
  const double Tsq = 4.0;
  CHECK(occupation_norm_sq(KernelConfig::gaussian(3, 1.0), tr) <= Tsq * (1.0 + 1e-8));
}

TEST_CASE("occupation norm along a straight line") {
  // int int exp(-2 (tau - t)^2), reference from a 4001 x 4001 trapezoid rule (agrees with
  // the closed form to 2e-8)
  const double pinned = 0.7639556549409145;
  CHECK(occupation_norm_sq(KernelConfig::gaussian(3, 1.0), line_trajectory(400)) ==
        doctest::Approx(pinned).epsilon(1e-8));
}

TEST_CASE("occupation norm bound for random trajectories and every kernel") {
  std::mt19937_64 rng(21);
  const auto f = testing::exprs({"-x1 + 2*u1"}, 1, 1);
  const std::vector<KernelConfig> kernels{KernelConfig::gaussian(3, 0.3),
                                          KernelConfig::wendland_c2(3, 0.8),
                                          KernelConfig::wendland_c4(3, 0.8)};
  for (int i = 0; i < 20; ++i) {
    const Trajectory tr =
        simulate(f, vec({0.5}), testing::random_control(rng, 1.0, 4, 1, -1.0, 1.0), 1.0, 40);
    for (const auto& k : kernels) {
      const double norm = occupation_norm_sq(k, tr);
      CHECK(norm >= 0.0);
      CHECK(norm <= 1.0 * (1.0 + 1e-8));
    }
  }
}

TEST_CASE("norm equals the integral of the occupation kernel along the path") {
  std::mt19937_64 rng(4);
  const auto f = testing::exprs({"x1 * u1"}, 1, 1);
  const auto k = KernelConfig::gaussian(3, 0.5);
  const Trajectory tr =
      simulate(f, vec({1.0}), testing::random_control(rng, 1.0, 1, 1, -1.0, 1.0), 1.0, 60);
  const Eigen::VectorXd w = simpson_weights(tr.steps(), tr.horizon());
  double outer = 0.0;
  for (int j = 0; j <= tr.steps(); ++j) outer += w(j) * occupation_eval(k, tr, tr.s_point(j));
  CHECK(outer == doctest::Approx(occupation_norm_sq(k, tr)).epsilon(1e-6));
}

TEST_CASE("inner products with simple functions") {
  const Trajectory tr = constant_trajectory(2.0, 10, 1.0, 0.0);
  CHECK(inner_with_function(parse("1", 1, 1), tr) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(inner_with_function(parse("t", 1, 1), line_trajectory(2)) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(inner_with_function(parse("x1", 1, 0), tr), ArgumentError);
  CHECK_THROWS_AS(inner_with_function(parse("1/(x1 - 1)", 1, 1), tr), EvalError);
}

TEST_CASE("running cost of the optimal LQ feedback matches the Riccati cost") {
  const auto f = testing::exprs({"u1"}, 1, 1);
  const Trajectory tr =
      simulate(f, vec({1.0}), PiecewiseControl({parse("-tanh(1 - t) * x1", 1, 0)}), 1.0, 400);
  CHECK(std::abs(inner_with_function(parse("x1^2 + u1^2", 1, 1), tr) - std::tanh(1.0)) <= 2e-3);
}

TEST_CASE("inner product with a kernel expansion equals the weighted occupation values") {
  const auto f = testing::exprs({"-x1 + u1"}, 1, 1);
  const Trajectory tr =
      simulate(f, vec({1.0}), PiecewiseControl({parse("cos(3*t)", 1, 0)}), 1.0, 200);
  const auto k = KernelConfig::gaussian(3, 0.8);
  const std::vector<Eigen::VectorXd> centers{vec({0.1, 0.5, 0.2}), vec({0.7, -0.3, 0.9}),
                                             vec({0.4, 1.0, -0.5})};
  const std::vector<double> a{0.7, -1.2, 2.5};
  std::string h;
  double expected = 0.0;
  for (std::size_t j = 0; j < centers.size(); ++j) {
    const auto& y = centers[j];
    h += (j ? " + " : "") + std::to_string(a[j]) + " * exp(-((t - " + std::to_string(y(0)) +
         ")^2 + (x1 - " + std::to_string(y(1)) + ")^2 + (u1 - " + std::to_string(y(2)) +
         ")^2) / 0.8)";
    expected += a[j] * occupation_eval(k, tr, y);
  }
  const double got = inner_with_function(parse(h, 1, 1), tr);
  CHECK(got == doctest::Approx(expected).epsilon(1e-8));
}

TEST_CASE("quadrature splits jump nodes between their two panels") {
  const auto f = testing::exprs({"u1"}, 1, 1);
  const PiecewiseControl u({0.0, 0.5, 1.0}, {vec({1.0}), vec({-1.0})});
  const Trajectory tr = simulate(f, vec({0.0}), u, 1.0, 8);
  CHECK(tr.has_jumps());
  const auto nodes = quadrature_nodes(tr);
  CHECK(nodes.size() == 10);
  double total = 0.0;
  for (const auto& q : nodes) total += q.weight;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
  // int u^2 = 1 exactly, int u = 0 exactly
  CHECK(inner_with_function(parse("u1^2", 1, 1), tr) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(inner_with_function(parse("u1", 1, 1), tr)) <= 1e-15);
  CHECK(tr.s_point(4, true)(2) == 1.0);
  CHECK(tr.s_point(4)(2) == -1.0);
}

TEST_CASE("adjoint residual of a pure time derivative is tiny") {
  const Trajectory tr = constant_trajectory(1.0, 400, 0.7, 0.0);
  const auto f = testing::exprs({"0"}, 1, 1);
  std::mt19937_64 rng(9);
  for (const auto& k : {KernelConfig::gaussian(2, 1.0), KernelConfig::wendland_c4(2, 1.5)}) {
    for (int i = 0; i < 10; ++i) {
      const Eigen::VectorXd c = testing::uniform_vec(rng, 2, -1.0, 1.0);
      CHECK(adjoint_identity_residual(k, f, tr, c) <= 1e-10);
    }
  }
}

TEST_CASE("adjoint residual converges at fourth order") {
  const auto f = testing::exprs({"-x1 + u1"}, 1, 1);
  const auto k = KernelConfig::gaussian(2, 1.0);
  const Trajectory t400 = decay_trajectory(400);
  const Trajectory t100 = decay_trajectory(100);
  const Trajectory t200 = decay_trajectory(200);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 10; ++i) {
    const Eigen::VectorXd c = vec({testing::uniform_vec(rng, 1, 0.0, 1.0)(0),
                                   testing::uniform_vec(rng, 1, -1.0, 2.0)(0)});
    CHECK(adjoint_identity_residual(k, f, t400, c) <= 1e-4);
    const double r100 = adjoint_identity_residual(k, f, t100, c);
    const double r200 = adjoint_identity_residual(k, f, t200, c);
    CHECK(r200 <= r100 / 8.0);
  }
}

TEST_CASE("adjoint residual detects a trajectory that does not solve the dynamics") {
  const auto wrong = testing::exprs({"x1 + u1"}, 1, 1);
  const auto k = KernelConfig::gaussian(2, 1.0);
  CHECK(adjoint_identity_residual(k, wrong, decay_trajectory(400), vec({0.5, 0.5})) > 1e-2);
  CHECK_THROWS_AS(adjoint_identity_residual(k, wrong, decay_trajectory(4), vec({0.5})),
                  ArgumentError);
}

TEST_CASE("trajectory CSV round trip") {
  const Trajectory tr = decay_trajectory(10);
  std::stringstream ss;
  write_trajectory_csv(ss, tr);
  const std::string text = ss.str();
  CHECK(text.rfind("t,x1,u1\n", 0) == 0);
  const Trajectory back = read_trajectory_csv(ss);
  CHECK(back.states() == tr.states());
  CHECK(back.controls() == tr.controls());
  CHECK(back.horizon() == tr.horizon());
  std::stringstream bad("t,x1\n0,1\n0.5,oops\n1,2\n");
  CHECK_THROWS_AS(read_trajectory_csv(bad), ArgumentError);
}
