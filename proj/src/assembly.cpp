#include "okoc/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <string>

#include "okoc/csv.hpp"
#include "okoc/errors.hpp"

namespace okoc {

std::string_view to_string(CenterStrategy strategy) {
  return strategy == CenterStrategy::Halton ? "halton" : "grid";
}

double radical_inverse(std::uint64_t index, int base) {
  const double inv_base = 1.0 / base;
  double factor = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += factor * static_cast<double>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
    factor *= inv_base;
  }
  return result;
}

std::vector<int> first_primes(int count) {
  std::vector<int> primes;
  for (int candidate = 2; static_cast<int>(primes.size()) < count; ++candidate) {
    bool prime = true;
    for (int p : primes) {
      if (p * p > candidate) break;
      if (candidate % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(candidate);
  }
  return primes;
}

Eigen::MatrixXd halton_points(const Box& box, int count, std::uint64_t first) {
  const int d = box.dim();
  const std::vector<int> bases = first_primes(d);
  const Eigen::VectorXd width = box.width();
  Eigen::MatrixXd pts(count, d);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < d; ++j) {
      pts(i, j) = box.lower(j) +
                  width(j) * radical_inverse(first + static_cast<std::uint64_t>(i),
                                             bases[static_cast<std::size_t>(j)]);
    }
  }
  return pts;
}

Eigen::MatrixXd grid_points(const Box& box, int count) {
  const int d = box.dim();
  int per_axis = 1;
  while (std::pow(static_cast<double>(per_axis), d) < count) ++per_axis;
  Eigen::MatrixXd pts(count, d);
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < d; ++j) {
      const double frac =
          per_axis == 1 ? 0.0 : static_cast<double>(idx[static_cast<std::size_t>(j)]) / (per_axis - 1);
      pts(i, j) = box.lower(j) + frac * (box.upper(j) - box.lower(j));
    }
    // odometer increment, last coordinate fastest
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < per_axis) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }
  return pts;
}

double median_sq_distance(const Box& box) {
  constexpr int kProbe = 200;
  const Eigen::MatrixXd pts = halton_points(box, kProbe, 1);
  std::vector<double> d2;
  d2.reserve(kProbe * (kProbe - 1) / 2);
  for (int i = 0; i < kProbe; ++i) {
    for (int j = i + 1; j < kProbe; ++j) d2.push_back((pts.row(i) - pts.row(j)).squaredNorm());
  }
  const std::size_t mid = d2.size() / 2;
  std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(mid), d2.end());
  const double upper = d2[mid];
  if (d2.size() % 2 == 1) return upper;
  const double lower = *std::max_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

namespace {

Eigen::MatrixXd sample_box(const Box& box, int count, CenterStrategy strategy,
                           std::uint64_t seed) {
  if (strategy == CenterStrategy::Grid) return grid_points(box, count);
  return halton_points(box, count, 1 + seed);
}

Eigen::MatrixXd sigma_centers(const ProblemSpec& spec, int count, CenterStrategy strategy,
                              std::uint64_t seed) {
  const Box box = spec.sigma_box();
  Eigen::VectorXd pinned(1 + spec.n);
  pinned(0) = 0.0;
  pinned.tail(spec.n) = spec.x0;

  Eigen::MatrixXd out(count, 1 + spec.n);
  out.row(0) = pinned.transpose();
  int filled = 1;
  auto accept = [&](const Eigen::VectorXd& p) {
    if ((p - pinned).cwiseAbs().maxCoeff() < 1e-9) return;
    out.row(filled++) = p.transpose();
  };

  if (strategy == CenterStrategy::Grid) {
    // One spare grid point covers the case where the pinned center lies on the grid.
    const Eigen::MatrixXd grid = grid_points(box, count);
    for (Eigen::Index i = 0; i < grid.rows() && filled < count; ++i) {
      accept(grid.row(i).transpose());
    }
  } else {
    std::uint64_t index = 1 + seed;
    while (filled < count) {
      accept(halton_points(box, 1, index++).row(0).transpose());
    }
  }
  if (filled < count) throw ArgumentError("could not place enough distinct sigma centers");
  return out;
}

}  // namespace

CenterSet generate_centers(const ProblemSpec& spec, int M_S, int M_D, int M_b,
                           CenterStrategy strategy, std::uint64_t seed) {
  if (M_S < 1 || M_D < 1 || M_b < 1) throw ArgumentError("center counts must be >= 1");
  if (M_b > M_S + M_D) {
    throw ArgumentError("M_b must not exceed M_S + M_D (overdetermined equality system)");
  }
  spec.validate();
  CenterSet centers;
  centers.seed = seed;
  centers.s_centers = sample_box(spec.s_box(), M_S, strategy, seed);
  centers.d_centers = sample_box(spec.D, M_D, strategy, seed);
  centers.sigma_centers = sigma_centers(spec, M_b, strategy, seed);
  return centers;
}

double apply_total_derivative(const KernelConfig& kSigma,
                              Eigen::Ref<const Eigen::VectorXd> sigma_center,
                              Eigen::Ref<const Eigen::VectorXd> tx,
                              Eigen::Ref<const Eigen::VectorXd> f_value) {
  if (tx.size() != kSigma.dim() || sigma_center.size() != kSigma.dim() ||
      f_value.size() != kSigma.dim() - 1) {
    throw ArgumentError("total derivative dimension mismatch");
  }
  const Eigen::VectorXd diff = tx - sigma_center;
  const double factor = kSigma.gradient_factor(diff.squaredNorm());
  return factor * (diff(0) + f_value.dot(diff.tail(f_value.size())));
}

double apply_total_derivative(const KernelConfig& kSigma,
                              Eigen::Ref<const Eigen::VectorXd> sigma_center,
                              Eigen::Ref<const Eigen::VectorXd> s, std::span<const Expr> f) {
  const auto n = static_cast<Eigen::Index>(f.size());
  if (n != kSigma.dim() - 1) throw ArgumentError("dynamics length must match Sigma dimension");
  if (s.size() < 1 + n) throw ArgumentError("point in S is too short");
  const Eigen::VectorXd x = s.segment(1, n);
  const Eigen::VectorXd u = s.tail(s.size() - 1 - n);
  Eigen::VectorXd fx(n);
  eval_all(f, s(0), std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
           std::span<const double>(u.data(), static_cast<std::size_t>(u.size())),
           std::span<double>(fx.data(), static_cast<std::size_t>(n)));
  return apply_total_derivative(kSigma, sigma_center, s.head(1 + n), fx);
}

namespace {

std::string describe(const char* kind, Eigen::Index i, Eigen::Ref<const Eigen::VectorXd> p) {
  std::ostringstream os;
  os << kind << " center " << i << " (";
  for (Eigen::Index j = 0; j < p.size(); ++j) os << (j ? ", " : "") << p(j);
  os << ")";
  return os.str();
}

}  // namespace

FiniteProgram assemble(const ProblemSpec& spec, const CenterSet& centers) {
  spec.validate();
  const int n = spec.n;
  const int m = spec.m;
  const Eigen::Index MS = centers.s_centers.rows();
  const Eigen::Index MD = centers.d_centers.rows();
  const Eigen::Index Mb = centers.sigma_centers.rows();
  if (centers.s_centers.cols() != 1 + n + m || centers.d_centers.cols() != n ||
      centers.sigma_centers.cols() != 1 + n) {
    throw ArgumentError("center set dimensions do not match the problem");
  }

  FiniteProgram p;
  p.c.resize(MS + MD);
  p.A.resize(Mb, MS + MD);
  p.b.resize(Mb);

  // f at every s-center, reused by all rows
  Eigen::MatrixXd f_at_s(MS, n);
  for (Eigen::Index i = 0; i < MS; ++i) {
    const Eigen::VectorXd s = centers.s_centers.row(i).transpose();
    const Eigen::VectorXd x = s.segment(1, n);
    const Eigen::VectorXd u = s.tail(m);
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(n));
    const std::span<const double> us(u.data(), static_cast<std::size_t>(m));
    try {
      p.c(i) = spec.running_cost.eval(s(0), xs, us);
      for (int j = 0; j < n; ++j) {
        f_at_s(i, j) = spec.dynamics[static_cast<std::size_t>(j)].eval(s(0), xs, us);
      }
    } catch (const EvalError& e) {
      throw AssemblyError(describe("s", i, s) + ": " + e.what());
    }
  }
  for (Eigen::Index i = 0; i < MD; ++i) {
    const Eigen::VectorXd d = centers.d_centers.row(i).transpose();
    try {
      p.c(MS + i) = spec.terminal_cost.eval(spec.horizon,
                                            std::span<const double>(d.data(), static_cast<std::size_t>(n)),
                                            {});
    } catch (const EvalError& e) {
      throw AssemblyError(describe("d", i, d) + ": " + e.what());
    }
  }

  Eigen::VectorXd base(1 + n);
  base(0) = 0.0;
  base.tail(n) = spec.x0;
  Eigen::VectorXd terminal(1 + n);
  terminal(0) = spec.horizon;
  for (Eigen::Index row = 0; row < Mb; ++row) {
    const Eigen::VectorXd center = centers.sigma_centers.row(row).transpose();
    for (Eigen::Index i = 0; i < MS; ++i) {
      const Eigen::VectorXd tx = centers.s_centers.row(i).head(1 + n).transpose();
      p.A(row, i) = -apply_total_derivative(spec.kernel_Sigma, center, tx,
                                            f_at_s.row(i).transpose());
    }
    for (Eigen::Index i = 0; i < MD; ++i) {
      terminal.tail(n) = centers.d_centers.row(i).transpose();
      p.A(row, MS + i) = eval(spec.kernel_Sigma, terminal, center);
    }
    p.b(row) = eval(spec.kernel_Sigma, base, center);
    if (p.A.row(row).cwiseAbs().maxCoeff() <= 1e-12) p.far_rows.push_back(static_cast<int>(row));
  }
  if (!p.A.allFinite() || !p.c.allFinite() || !p.b.allFinite()) {
    throw AssemblyError("non-finite entry in the assembled program");
  }

  p.G_S = gram(spec.kernel_S, centers.s_centers);
  p.G_D = gram(spec.kernel_D, centers.d_centers);
  p.phi0_S = phi0(spec.kernel_S);
  p.phi0_D = phi0(spec.kernel_D);
  p.r_S = spec.horizon * spec.horizon * p.phi0_S;
  p.r_D = p.phi0_D;
  return p;
}

void write_program_dump(std::ostream& out, const FiniteProgram& p) {
  auto line = [&](const auto& vec) {
    for (Eigen::Index i = 0; i < vec.size(); ++i) {
      out << (i ? " " : "") << csv::format_double(vec(i));
    }
    out << '\n';
  };
  out << p.size_S() << ' ' << p.size_D() << ' ' << p.rows() << '\n';
  line(p.c);
  for (Eigen::Index r = 0; r < p.A.rows(); ++r) line(p.A.row(r));
  line(p.b);
  for (Eigen::Index r = 0; r < p.G_S.rows(); ++r) line(p.G_S.row(r));
  for (Eigen::Index r = 0; r < p.G_D.rows(); ++r) line(p.G_D.row(r));
  out << csv::format_double(p.r_S) << ' ' << csv::format_double(p.r_D) << '\n';
}

}  // namespace okoc
