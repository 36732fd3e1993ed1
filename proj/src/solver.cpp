#include "okoc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include "okoc/errors.hpp"

namespace okoc {

void SolveOptions::validate() const {
  if (!(eq_tol > 0.0) || !(stat_tol > 0.0)) throw ArgumentError("tolerances must be positive");
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (!(penalty_init > 0.0)) throw ArgumentError("penalty_init must be positive");
  if (!(penalty_growth > 1.0)) throw ArgumentError("penalty_growth must exceed 1");
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::ToleranceNotMet:
      return "tolerance_not_met";
    case SolveStatus::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

Eigen::VectorXd SolveResult::z() const {
  Eigen::VectorXd out(w.size() + v.size());
  out << w, v;
  return out;
}

// ---------------------------------------------------------------------------------------------

EllipsoidProjector::EllipsoidProjector(const Eigen::MatrixXd& G, double r) : r_(r) {
  if (G.rows() != G.cols()) throw ArgumentError("ellipsoid matrix must be square");
  if (!(r > 0.0) || !std::isfinite(r)) throw ArgumentError("ellipsoid radius must be positive");
  if (!G.allFinite()) throw ArgumentError("non-finite ellipsoid matrix");
  if (G.rows() == 0) return;

  const double scale = std::max(G.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  Eigen::MatrixXd Gj = 0.5 * (G + G.transpose());
  Gj.diagonal().array() += kGramJitter * scale;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Gj);
  if (eig.info() != Eigen::Success) throw InputError("eigendecomposition of Gram matrix failed");
  eigenvalues_ = eig.eigenvalues();
  if (eigenvalues_.minCoeff() < -1e-8 * scale) {
    throw InputError("Gram matrix is not positive semidefinite after jitter (min eigenvalue " +
                     std::to_string(eigenvalues_.minCoeff()) + ")");
  }
  // Clamp roundoff below the jitter level so every direction has positive curvature.
  eigenvalues_ = eigenvalues_.cwiseMax(0.5 * kGramJitter * scale);
  basis_ = eig.eigenvectors();
}

double EllipsoidProjector::quadratic(const Eigen::VectorXd& z) const {
  if (z.size() == 0) return 0.0;
  const Eigen::VectorXd zh = basis_.transpose() * z;
  return (eigenvalues_.array() * zh.array().square()).sum();
}

Eigen::VectorXd EllipsoidProjector::project(const Eigen::VectorXd& z, double* multiplier) const {
  if (z.size() != dim()) throw ArgumentError("projection argument has the wrong dimension");
  if (!z.allFinite()) throw ArgumentError("non-finite projection argument");
  if (multiplier) *multiplier = 0.0;
  if (z.size() == 0) return z;

  const Eigen::ArrayXd zh = (basis_.transpose() * z).array();
  const Eigen::ArrayXd a = eigenvalues_.array() * zh.square();  // lambda_i zh_i^2
  auto q = [&](double mu) { return (a / (1.0 + mu * eigenvalues_.array()).square()).sum(); };
  if (a.sum() <= r_) return z;

  // Root of psi(mu) = 1/sqrt(r) - 1/sqrt(q(mu)), which is close to linear in mu. Newton steps
  // are kept inside a bracket [lo, hi] with q(lo) > r >= q(hi).
  double lo = 0.0;
  double hi = zh.square().sum() / (4.0 * r_);  // lambda/(1+mu lambda)^2 <= 1/(4 mu)
  double mu = 0.0;
  for (int it = 0; it < 200; ++it) {
    const Eigen::ArrayXd denom = 1.0 + mu * eigenvalues_.array();
    const double qv = (a / denom.square()).sum();
    if (qv > r_) {
      lo = mu;
    } else {
      hi = mu;
    }
    if (std::abs(qv - r_) <= 1e-15 * r_ || hi - lo <= 1e-15 * hi) break;
    const double dq = -2.0 * (a * eigenvalues_.array() / denom.cube()).sum();
    // psi'(mu) = q'/(2 q^{3/2}), psi(mu) = 1/sqrt(r) - 1/sqrt(q)
    const double psi = 1.0 / std::sqrt(r_) - 1.0 / std::sqrt(qv);
    const double dpsi = dq / (2.0 * qv * std::sqrt(qv));
    double next = dpsi != 0.0 ? mu - psi / dpsi : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    mu = next;
  }
  if (multiplier) *multiplier = mu;
  Eigen::VectorXd yh = (zh / (1.0 + mu * eigenvalues_.array())).matrix();
  // Roundoff can leave q(mu) a few ulps above r; pull the point onto the boundary.
  const double qv = q(mu);
  if (qv > r_) yh *= std::sqrt(r_ / qv);
  return basis_ * yh;
}

Eigen::VectorXd project_ellipsoid(const Eigen::VectorXd& z, const Eigen::MatrixXd& G, double r) {
  if (!z.allFinite()) throw ArgumentError("non-finite projection argument");
  return EllipsoidProjector(G, r).project(z);
}

// ---------------------------------------------------------------------------------------------

namespace {

struct BallSet {
  EllipsoidProjector S;
  EllipsoidProjector D;

  BallSet(const FiniteProgram& p) : S(p.G_S, p.r_S), D(p.G_D, p.r_D) {}

  Eigen::VectorXd project(const Eigen::VectorXd& z, double* mu_S = nullptr,
                          double* mu_D = nullptr) const {
    Eigen::VectorXd out(z.size());
    out.head(S.dim()) = S.project(z.head(S.dim()), mu_S);
    out.tail(D.dim()) = D.project(z.tail(D.dim()), mu_D);
    return out;
  }
};

void check_program(const FiniteProgram& p) {
  const int cols = p.cols();
  if (p.G_S.rows() + p.G_D.rows() != cols) {
    throw ArgumentError("Gram block sizes do not add up to the number of variables");
  }
  if (p.A.cols() != cols && p.A.rows() > 0) throw ArgumentError("A has the wrong column count");
  if (p.b.size() != p.A.rows()) throw ArgumentError("b length must equal the rows of A");
  if (!p.c.allFinite() || !p.A.allFinite() || !p.b.allFinite()) {
    throw ArgumentError("non-finite program data");
  }
}

struct Stationarity {
  double norm;
  double mu_S;
  double mu_D;
};

// ||z - P(z - g)|| with the projection multipliers of that step.
Stationarity step_one_mapping(const BallSet& balls, const Eigen::VectorXd& z,
                              const Eigen::VectorXd& g) {
  Stationarity s{0.0, 0.0, 0.0};
  const Eigen::VectorXd trial = balls.project(z - g, &s.mu_S, &s.mu_D);
  s.norm = (z - trial).norm();
  return s;
}

double residual_inf(const FiniteProgram& p, const Eigen::VectorXd& z) {
  if (p.A.rows() == 0) return 0.0;
  return (p.A * z - p.b).cwiseAbs().maxCoeff();
}

KktResiduals kkt_with(const FiniteProgram& p, const BallSet& balls, const Eigen::VectorXd& z,
                      const Eigen::VectorXd& lambda) {
  KktResiduals k{};
  k.eq_residual_inf = residual_inf(p, z);
  Eigen::VectorXd g = p.c;
  if (p.A.rows() > 0) g.noalias() += p.A.transpose() * lambda;
  const Stationarity s = step_one_mapping(balls, z, g);
  k.stationarity = s.norm;
  // Stationarity c + A'l + 2 alpha G w = 0 gives alpha = mu / 2 at a fixed point.
  const Eigen::VectorXd w = z.head(balls.S.dim());
  const Eigen::VectorXd v = z.tail(balls.D.dim());
  const double slack_S = p.r_S - balls.S.quadratic(w);
  const double slack_D = p.r_D - balls.D.quadratic(v);
  k.complementarity = std::abs(0.5 * s.mu_S * slack_S) + std::abs(0.5 * s.mu_D * slack_D);
  return k;
}

/// Rows kept after modified Gram-Schmidt (two passes) on the rows of A.
std::vector<int> independent_rows(const Eigen::MatrixXd& A, std::vector<int>& dropped) {
  std::vector<int> kept;
  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index r = 0; r < A.rows(); ++r) {
    Eigen::VectorXd row = A.row(r).transpose();
    const double norm0 = row.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (const Eigen::VectorXd& q : basis) row -= q.dot(row) * q;
    }
    const double norm = row.norm();
    if (norm0 == 0.0 || norm <= 1e-10 * norm0) {
      dropped.push_back(static_cast<int>(r));
      continue;
    }
    basis.push_back(row / norm);
    kept.push_back(static_cast<int>(r));
  }
  return kept;
}

}  // namespace

KktResiduals kkt_residuals(const FiniteProgram& p, const SolveResult& res) {
  check_program(p);
  const BallSet balls(p);
  const Eigen::VectorXd z = res.z();
  if (z.size() != p.cols()) throw ArgumentError("result size does not match the program");
  Eigen::VectorXd lambda = res.eq_multipliers;
  if (lambda.size() != p.A.rows()) lambda = Eigen::VectorXd::Zero(p.A.rows());
  return kkt_with(p, balls, z, lambda);
}

namespace {

/// Eigenbasis scaled so that z = W y turns z' G z into ||y||^2.
Eigen::MatrixXd whitening(const EllipsoidProjector& P) {
  if (P.dim() == 0) return Eigen::MatrixXd(0, 0);
  const Eigen::VectorXd scale = P.eigenvalues().cwiseSqrt().cwiseInverse();
  return P.basis() * scale.asDiagonal();
}

double root_of(double a2, double b2, double c2) {
  // Largest e with a2 e^2 + b2 e + c2 = 0 where c2 <= 0; +inf when the quadratic is flat.
  if (a2 <= 0.0) return std::numeric_limits<double>::infinity();
  return (-b2 + std::sqrt(std::max(b2 * b2 - 4.0 * a2 * c2, 0.0))) / (2.0 * a2);
}

/// min c'y s.t. A'y = b, ||y_S||^2 <= r_S, ||y_D||^2 <= r_D, for a fixed ratio s of the inverse
/// ball multipliers. With E = e diag(s I, I), the KKT point is y0 + e y1 where y0 is the
/// minimum diag(s I, I)^{-1}-norm solution of A'y = b and y1 the projected descent direction.
class RatioSlice {
 public:
  RatioSlice(const Eigen::MatrixXd& Ap, const Eigen::VectorXd& cp, const Eigen::VectorXd& b,
             int MS, double s)
      : MS_(MS) {
    const auto cols = Ap.cols();
    const auto rows = Ap.rows();
    sq_ = Eigen::VectorXd::Ones(cols);
    sq_.head(MS).setConstant(std::sqrt(s));
    ch_ = sq_.cwiseProduct(cp);
    if (rows > 0) {
      const Eigen::MatrixXd B = sq_.asDiagonal() * Ap.transpose();
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
      Q_ = qr.householderQ() * Eigen::MatrixXd::Identity(cols, rows);
      R_ = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>();
      const Eigen::VectorXd t = R_.transpose().triangularView<Eigen::Lower>().solve(b);
      y0_ = sq_.cwiseProduct(Q_ * t);
      y1_ = -sq_.cwiseProduct(ch_ - Q_ * (Q_.transpose() * ch_));
    } else {
      y0_ = Eigen::VectorXd::Zero(cols);
      y1_ = -sq_.cwiseProduct(ch_);
    }
  }

  /// Largest scale keeping the block inside its ball; -1 when y0 already violates it.
  double limit(bool first_block, double r) const {
    const auto len = first_block ? MS_ : y0_.size() - MS_;
    const auto off = first_block ? 0 : MS_;
    const auto a = y0_.segment(off, len);
    const auto d = y1_.segment(off, len);
    const double c2 = a.squaredNorm() - r;
    if (c2 > 0.0) return -1.0;
    return root_of(d.squaredNorm(), 2.0 * a.dot(d), c2);
  }

  /// Minimum-norm (same metric) correction dy with A' dy = rhs.
  Eigen::VectorXd correction(const Eigen::VectorXd& rhs) const {
    if (R_.rows() == 0) return Eigen::VectorXd::Zero(y0_.size());
    const Eigen::VectorXd t = R_.transpose().triangularView<Eigen::Lower>().solve(rhs);
    return sq_.cwiseProduct(Q_ * t);
  }

  const Eigen::VectorXd& y0() const { return y0_; }
  const Eigen::VectorXd& y1() const { return y1_; }

 private:
  Eigen::Index MS_;
  Eigen::VectorXd sq_;
  Eigen::VectorXd ch_;
  Eigen::MatrixXd Q_;
  Eigen::MatrixXd R_;
  Eigen::VectorXd y0_;
  Eigen::VectorXd y1_;
};

/// The ratio limit where one ball's multiplier vanishes. With mu = kappa * lambda and the free
/// block given zero curvature, [P_K Ap'; Ap 0] (y, mu) = (-kappa c, b) is affine in kappa, so
/// two solves give the whole path; kappa is then set by the binding ball. Empty when the
/// system is inconsistent (cost unbounded along the free block) or the free ball is violated.
std::optional<Eigen::VectorXd> one_sided(const Eigen::MatrixXd& Ap, const Eigen::VectorXd& cp,
                                  const Eigen::VectorXd& b, Eigen::Index MS, bool free_S,
                                  double r_bind, double r_free) {
  const auto cols = Ap.cols();
  const auto rows = Ap.rows();
  const auto off = free_S ? MS : 0;
  const auto len = free_S ? cols - MS : MS;
  const auto foff = free_S ? 0 : MS;
  const auto flen = cols - len;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(cols + rows, cols + rows);
  M.block(off, off, len, len).setIdentity();
  M.topRightCorner(cols, rows) = Ap.transpose();
  M.bottomLeftCorner(rows, cols) = Ap;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(cols + rows, 2);
  rhs.col(0).tail(rows) = b;
  rhs.col(1).head(cols) = -cp;
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  const Eigen::MatrixXd sol = cod.solve(rhs);
  const double tol = 1e-9 * (M.norm() * sol.norm() + rhs.norm());
  if (!sol.allFinite() || (M * sol - rhs).norm() > tol) return std::nullopt;

  const Eigen::VectorXd y0 = sol.col(0).head(cols);
  const Eigen::VectorXd y1 = sol.col(1).head(cols);
  const double c2 = y0.segment(off, len).squaredNorm() - r_bind;
  if (c2 > 0.0) return std::nullopt;
  const double kappa = root_of(y1.segment(off, len).squaredNorm(),
                               2.0 * y0.segment(off, len).dot(y1.segment(off, len)), c2);
  if (!(kappa > 0.0) || std::isinf(kappa)) return std::nullopt;
  Eigen::VectorXd y = y0 + kappa * y1;
  if (y.segment(foff, flen).squaredNorm() > r_free * (1.0 + 1e-9)) return std::nullopt;
  return y;
}

}  // namespace

SolveResult solve(const FiniteProgram& p, const SolveOptions& opts) {
  opts.validate();
  check_program(p);
  const BallSet balls(p);
  const int cols = p.cols();
  const int MS = balls.S.dim();
  const int MD = cols - MS;

  SolveResult result;
  const std::vector<int> kept = independent_rows(p.A, result.dropped_rows);
  const auto rows = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd A(rows, cols);
  Eigen::VectorXd b(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    A.row(i) = p.A.row(kept[static_cast<std::size_t>(i)]);
    b(i) = p.b(kept[static_cast<std::size_t>(i)]);
  }

  const Eigen::MatrixXd WS = whitening(balls.S);
  const Eigen::MatrixXd WD = whitening(balls.D);
  Eigen::MatrixXd Ap(rows, cols);
  Eigen::VectorXd cp(cols);
  if (MS > 0) {
    Ap.leftCols(MS) = A.leftCols(MS) * WS;
    cp.head(MS) = WS.transpose() * p.c.head(MS);
  }
  if (MD > 0) {
    Ap.rightCols(MD) = A.rightCols(MD) * WD;
    cp.tail(MD) = WD.transpose() * p.c.tail(MD);
  }
  auto to_z = [&](const Eigen::VectorXd& y) {
    Eigen::VectorXd z(cols);
    if (MS > 0) z.head(MS) = WS * y.head(MS);
    if (MD > 0) z.tail(MD) = WD * y.tail(MD);
    return z;
  };

  int evaluations = 0;
  auto slice_at = [&](double log_s) {
    ++evaluations;
    return RatioSlice(Ap, cp, b, MS, std::exp(log_s));
  };
  auto limits = [&](const RatioSlice& sl) {
    const double eS = MS > 0 ? sl.limit(true, p.r_S) : std::numeric_limits<double>::infinity();
    const double eD = MD > 0 ? sl.limit(false, p.r_D) : std::numeric_limits<double>::infinity();
    return std::pair{eS, eD};
  };

  // The S-limit falls and the D-limit rises with the ratio; the optimum balances them.
  constexpr double kRange = 60.0;
  double lo = -kRange;
  double hi = kRange;
  if (MS > 0 && MD > 0) {
    while (hi - lo > 1e-13 && evaluations < opts.max_iters) {
      const double mid = 0.5 * (lo + hi);
      const auto [eS, eD] = limits(slice_at(mid));
      if (eS > eD) {
        lo = mid;
      } else {
        hi = mid;
      }
      ++result.outer_iterations;
    }
  }
  const double log_s = (MS > 0 && MD > 0) ? 0.5 * (lo + hi) : 0.0;
  const RatioSlice slice = slice_at(log_s);
  const auto [eS, eD] = limits(slice);
  double e = std::min(eS, eD);

  SolveStatus status = SolveStatus::ToleranceNotMet;
  Eigen::VectorXd y;

  // An extreme ratio means one ball is slack: its multiplier is zero and the slice degenerates
  // (the limits lose all precision). Solve that limit directly, nearer side first.
  std::optional<Eigen::VectorXd> ep;
  if (MS > 0 && MD > 0 && std::abs(log_s) > 20.0) {
    const bool free_S = log_s > 0.0;
    for (bool side : {free_S, !free_S}) {
      if (!ep) {
        ep = side ? one_sided(Ap, cp, b, MS, true, p.r_D, p.r_S)
                  : one_sided(Ap, cp, b, MS, false, p.r_S, p.r_D);
        ++evaluations;
      }
    }
  }
  if (ep) {
    y = *ep;
    result.merit_history.push_back(rows > 0 ? (A * to_z(y) - b).cwiseAbs().maxCoeff() : 0.0);
  } else if (e < 0.0) {
    // No point of A z = b fits in both balls: report the balls' radial projection of y0.
    y = slice.y0();
    if (MS > 0 && y.head(MS).squaredNorm() > p.r_S) {
      y.head(MS) *= std::sqrt(p.r_S) / y.head(MS).norm();
    }
    if (MD > 0 && y.tail(MD).squaredNorm() > p.r_D) {
      y.tail(MD) *= std::sqrt(p.r_D) / y.tail(MD).norm();
    }
    status = SolveStatus::Infeasible;
  } else {
    if (std::isinf(e)) e = 0.0;  // cost already in the row space: every feasible point ties
    y = slice.y0() + e * slice.y1();
    // Iterative refinement on the equalities; a step is kept only if the merit drops.
    double merit = rows > 0 ? (A * to_z(y) - b).cwiseAbs().maxCoeff() : 0.0;
    result.merit_history.push_back(merit);
    for (int round = 0; round < 3 && rows > 0 && merit > 0.0; ++round) {
      const Eigen::VectorXd trial = y + slice.correction(b - Ap * y);
      const double m = (A * to_z(trial) - b).cwiseAbs().maxCoeff();
      ++evaluations;
      if (!(m < merit)) break;
      y = trial;
      merit = m;
      result.merit_history.push_back(merit);
    }
  }

  // Multipliers from c + A'lambda + 2 alpha y = 0 in least squares, with the ball multipliers
  // as unknowns too; a ball that does not bind keeps alpha = 0.
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(rows);
  if (rows > 0 && status != SolveStatus::Infeasible) {
    const bool bind_S = MS > 0 && y.head(MS).squaredNorm() >= p.r_S * (1.0 - 1e-7);
    const bool bind_D = MD > 0 && y.tail(MD).squaredNorm() >= p.r_D * (1.0 - 1e-7);
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(cols, rows + 2);
    K.leftCols(rows) = Ap.transpose();
    if (bind_S) K.col(rows).head(MS) = 2.0 * y.head(MS);
    if (bind_D) K.col(rows + 1).tail(MD) = 2.0 * y.tail(MD);
    lambda = K.colPivHouseholderQr().solve(-cp).head(rows);
  }
  Eigen::VectorXd full_lambda = Eigen::VectorXd::Zero(p.A.rows());
  for (Eigen::Index i = 0; i < rows; ++i) full_lambda(kept[static_cast<std::size_t>(i)]) = lambda(i);

  const Eigen::VectorXd z = to_z(y);
  result.w = z.head(MS);
  result.v = z.tail(MD);
  result.eq_multipliers = full_lambda;
  result.objective = p.c.dot(result.z());
  result.iterations = evaluations;
  result.ball_S_used = MS ? balls.S.quadratic(result.w) / p.r_S : 0.0;
  result.ball_D_used = MD ? balls.D.quadratic(result.v) / p.r_D : 0.0;

  const KktResiduals k = kkt_residuals(p, result);
  result.eq_residual_inf = k.eq_residual_inf;
  result.stationarity = k.stationarity;
  result.complementarity = k.complementarity;
  const bool balls_ok = result.ball_S_used <= 1.0 + 1e-8 && result.ball_D_used <= 1.0 + 1e-8;
  if (status != SolveStatus::Infeasible) {
    status = (k.eq_residual_inf <= opts.eq_tol && k.stationarity <= opts.stat_tol && balls_ok)
                 ? SolveStatus::Optimal
                 : SolveStatus::ToleranceNotMet;
  }
  result.status = status;
  return result;
}

}  // namespace okoc
