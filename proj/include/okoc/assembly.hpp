#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "okoc/kernels.hpp"
#include "okoc/problem.hpp"

namespace okoc {

enum class CenterStrategy { Halton, Grid };

std::string_view to_string(CenterStrategy strategy);

/// Radical inverse of `index` in `base` (van der Corput).
double radical_inverse(std::uint64_t index, int base);

/// The first `count` primes, used as Halton bases per coordinate.
std::vector<int> first_primes(int count);

/**
 * Halton points indices [first, first + count) scaled into the box, one per row.
 * Index 0 is the box's lower corner, index 1 maps to (1/2, 1/3, 1/5, ...).
 */
Eigen::MatrixXd halton_points(const Box& box, int count, std::uint64_t first);

/// Tensor grid with ceil(count^(1/d)) points per axis (endpoints included), lexicographic
/// order, truncated to `count` rows.
Eigen::MatrixXd grid_points(const Box& box, int count);

/// Median of pairwise squared distances among 200 Halton probe points in the box.
double median_sq_distance(const Box& box);

struct CenterSet {
  Eigen::MatrixXd s_centers;      // M_S x (1+n+m)
  Eigen::MatrixXd d_centers;      // M_D x n
  Eigen::MatrixXd sigma_centers;  // M_b x (1+n); row 0 is (0, x0)
  std::uint64_t seed = 0;
};

/**
 * Deterministic centers in S, D and Sigma. For Halton the seed offsets the sequence start
 * (seed 0 starts at index 1). Sigma centers within 1e-9 (sup norm) of the pinned (0, x0) are
 * skipped. Requires counts >= 1 and M_b <= M_S + M_D.
 */
CenterSet generate_centers(const ProblemSpec& spec, int M_S, int M_D, int M_b,
                           CenterStrategy strategy, std::uint64_t seed);

/**
 * (A_f sigma)(s) for sigma = K_Sigma(., sigma_center) and s = (t, x, u):
 * d/dt sigma(t, x) + f(t, x, u) . grad_x sigma(t, x).
 */
double apply_total_derivative(const KernelConfig& kSigma,
                              Eigen::Ref<const Eigen::VectorXd> sigma_center,
                              Eigen::Ref<const Eigen::VectorXd> s, std::span<const Expr> f);

/// Same, with f already evaluated at s. `tx` is (t, x).
double apply_total_derivative(const KernelConfig& kSigma,
                              Eigen::Ref<const Eigen::VectorXd> sigma_center,
                              Eigen::Ref<const Eigen::VectorXd> tx,
                              Eigen::Ref<const Eigen::VectorXd> f_value);

/**
 * Data of the finite-rank program over z = (w, v):
 *   minimize c.z  subject to  A z = b,  w' G_S w <= r_S,  v' G_D v <= r_D.
 */
struct FiniteProgram {
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G_S;
  Eigen::MatrixXd G_D;
  double r_S = 0.0;
  double r_D = 0.0;
  double phi0_S = 1.0;
  double phi0_D = 1.0;
  /// Rows whose sigma center is out of kernel reach of every s_i and d_i.
  std::vector<int> far_rows;

  int size_S() const { return static_cast<int>(G_S.rows()); }
  int size_D() const { return static_cast<int>(G_D.rows()); }
  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(c.size()); }
};

/// Throws AssemblyError naming the center when h, F or f fails to evaluate there.
FiniteProgram assemble(const ProblemSpec& spec, const CenterSet& centers);

/**
 * Plain-text dump:
 *   M_S M_D M_b
 *   c            (one line)
 *   A            (M_b lines, row-major)
 *   b            (one line)
 *   G_S          (M_S lines)
 *   G_D          (M_D lines)
 *   r_S r_D
 * Numbers use the shortest form that round-trips exactly.
 */
void write_program_dump(std::ostream& out, const FiniteProgram& p);

}  // namespace okoc
