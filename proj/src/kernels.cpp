#include "okoc/kernels.hpp"

#include <cmath>
#include <string>

#include "okoc/errors.hpp"

namespace okoc {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian:
      return "gaussian";
    case KernelFamily::WendlandC2:
      return "wendland_c2";
    case KernelFamily::WendlandC4:
      return "wendland_c4";
  }
  return "unknown";
}

std::optional<KernelFamily> parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "wendland_c2") return KernelFamily::WendlandC2;
  if (name == "wendland_c4") return KernelFamily::WendlandC4;
  return std::nullopt;
}

KernelConfig::KernelConfig(KernelFamily family, double shape, double support_radius, int dim)
    : family_(family), shape_(shape), support_radius_(support_radius), dim_(dim) {
  if (dim_ < 1) throw ArgumentError("kernel dimension must be positive");
  if (!(shape_ > 0.0) || !std::isfinite(shape_)) {
    throw ArgumentError("kernel shape must be a positive finite number");
  }
  if (family_ != KernelFamily::Gaussian &&
      (!(support_radius_ > 0.0) || !std::isfinite(support_radius_))) {
    throw ArgumentError("Wendland support radius must be a positive finite number");
  }
}

double KernelConfig::profile(double sq_dist) const {
  if (family_ == KernelFamily::Gaussian) return std::exp(-sq_dist / shape_);

  const double r = std::sqrt(sq_dist) / support_radius_;
  if (r >= 1.0) return 0.0;
  const double s = 1.0 - r;
  const double s2 = s * s;
  if (family_ == KernelFamily::WendlandC2) return s2 * s2 * (4.0 * r + 1.0);
  return s2 * s2 * s2 * ((35.0 * r + 18.0) * r + 3.0) / 3.0;
}

double KernelConfig::gradient_factor(double sq_dist) const {
  if (family_ == KernelFamily::Gaussian) return -2.0 / shape_ * std::exp(-sq_dist / shape_);

  // d/dx Phi(|x-y|/rho) = Phi'(r) / (r rho^2) (x - y); the 1/r cancels in both forms.
  const double r = std::sqrt(sq_dist) / support_radius_;
  if (r >= 1.0) return 0.0;
  const double s = 1.0 - r;
  const double rho2 = support_radius_ * support_radius_;
  if (family_ == KernelFamily::WendlandC2) return -20.0 * s * s * s / rho2;
  const double s5 = s * s * s * s * s;
  return -56.0 / 3.0 * s5 * (5.0 * r + 1.0) / rho2;
}

namespace {

void check_args(const KernelConfig& k, const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& y) {
  if (x.size() != k.dim() || y.size() != k.dim()) {
    throw ArgumentError("kernel argument dimension mismatch: expected " +
                        std::to_string(k.dim()) + ", got " + std::to_string(x.size()) + " and " +
                        std::to_string(y.size()));
  }
  if (!x.allFinite() || !y.allFinite()) throw ArgumentError("non-finite kernel argument");
}

void check_points(const KernelConfig& k, const Eigen::MatrixXd& points) {
  if (points.rows() == 0) throw ArgumentError("empty point list");
  if (points.cols() != k.dim()) {
    throw ArgumentError("point dimension " + std::to_string(points.cols()) +
                        " does not match kernel dimension " + std::to_string(k.dim()));
  }
  if (!points.allFinite()) throw ArgumentError("non-finite point");
}

}  // namespace

double eval(const KernelConfig& k, Eigen::Ref<const Eigen::VectorXd> x,
            Eigen::Ref<const Eigen::VectorXd> y) {
  check_args(k, x, y);
  return k.profile((x - y).squaredNorm());
}

Eigen::VectorXd grad_first(const KernelConfig& k, Eigen::Ref<const Eigen::VectorXd> x,
                           Eigen::Ref<const Eigen::VectorXd> y) {
  check_args(k, x, y);
  const Eigen::VectorXd diff = x - y;
  return k.gradient_factor(diff.squaredNorm()) * diff;
}

Eigen::MatrixXd gram(const KernelConfig& k, const Eigen::MatrixXd& points) {
  check_points(k, points);
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd g(n, n);
  const double diag = k.profile(0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = diag;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = k.profile((points.row(i) - points.row(j)).squaredNorm());
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Eigen::MatrixXd cross_gram(const KernelConfig& k, const Eigen::MatrixXd& a,
                           const Eigen::MatrixXd& b) {
  check_points(k, a);
  check_points(k, b);
  Eigen::MatrixXd g(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      g(i, j) = k.profile((a.row(i) - b.row(j)).squaredNorm());
    }
  }
  return g;
}

double phi0(const KernelConfig& k) { return k.profile(0.0); }

Eigen::MatrixXd jittered(const Eigen::MatrixXd& gram_matrix, double phi_zero) {
  Eigen::MatrixXd g = gram_matrix;
  g.diagonal().array() += kGramJitter * phi_zero;
  return g;
}

}  // namespace okoc
