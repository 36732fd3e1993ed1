#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Core>

namespace okoc {

enum class KernelFamily { Gaussian, WendlandC2, WendlandC4 };

std::string_view to_string(KernelFamily family);
std::optional<KernelFamily> parse_kernel_family(std::string_view name);

/// Relative diagonal jitter applied before any Gram matrix is factorized.
inline constexpr double kGramJitter = 1e-10;

/**
 * @brief A radial kernel K(x, y) = Phi(|x - y|) on R^dim.
 *
 * Gaussian:    Phi(d) = exp(-d^2 / shape)
 * Wendland C2: Phi(d) = (1 - r)_+^4 (4r + 1),                 r = d / support_radius
 * Wendland C4: Phi(d) = (1 - r)_+^6 (35r^2 + 18r + 3) / 3
 *
 * All three are normalized so Phi(0) = 1. The Wendland forms are positive definite for
 * dim <= 3. Immutable once constructed.
 */
class KernelConfig {
 public:
  KernelConfig(KernelFamily family, double shape, double support_radius, int dim);

  static KernelConfig gaussian(int dim, double shape) {
    return {KernelFamily::Gaussian, shape, 1.0, dim};
  }
  static KernelConfig wendland_c2(int dim, double support_radius) {
    return {KernelFamily::WendlandC2, 1.0, support_radius, dim};
  }
  static KernelConfig wendland_c4(int dim, double support_radius) {
    return {KernelFamily::WendlandC4, 1.0, support_radius, dim};
  }

  KernelFamily family() const { return family_; }
  double shape() const { return shape_; }
  double support_radius() const { return support_radius_; }
  int dim() const { return dim_; }
  bool compact() const { return family_ != KernelFamily::Gaussian; }

  /// Phi as a function of the squared distance. No argument checking.
  double profile(double sq_dist) const;

  /// Scalar s such that grad_x K(x, y) = s * (x - y), as a function of the squared distance.
  double gradient_factor(double sq_dist) const;

 private:
  KernelFamily family_;
  double shape_;
  double support_radius_;
  int dim_;
};

double eval(const KernelConfig& k, Eigen::Ref<const Eigen::VectorXd> x,
            Eigen::Ref<const Eigen::VectorXd> y);

/// Gradient of K(., y) with respect to its first argument, evaluated at x.
Eigen::VectorXd grad_first(const KernelConfig& k, Eigen::Ref<const Eigen::VectorXd> x,
                           Eigen::Ref<const Eigen::VectorXd> y);

/// Gram matrix over the rows of `points`.
Eigen::MatrixXd gram(const KernelConfig& k, const Eigen::MatrixXd& points);

/// Cross-kernel matrix K(a_i, b_j) over rows of a and b.
Eigen::MatrixXd cross_gram(const KernelConfig& k, const Eigen::MatrixXd& a,
                           const Eigen::MatrixXd& b);

double phi0(const KernelConfig& k);

/// G + kGramJitter * Phi(0) * I.
Eigen::MatrixXd jittered(const Eigen::MatrixXd& gram_matrix, double phi_zero);

}  // namespace okoc
