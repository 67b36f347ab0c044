#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>

namespace kcblb {

enum class KernelFamily { Linear, Polynomial, Gaussian };

KernelFamily parse_kernel_family(const std::string& name);
const char* to_string(KernelFamily family);

/// k(x, y) = C (x'y)^d + nugget * [same observation] for polynomial kernels,
/// exp(-|x-y|^2 / (2 bandwidth^2)) + nugget * [same observation] for Gaussian.
/// Linear is the polynomial kernel with C = 1, d = 1.
struct KernelSpec {
  KernelFamily family = KernelFamily::Linear;
  double scale = 1.0;
  int degree = 1;
  double bandwidth = 1.0;
  double nugget = 0.0;

  static KernelSpec linear() { return {}; }
  static KernelSpec polynomial(double scale, int degree, double nugget) {
    return {KernelFamily::Polynomial, scale, degree, 1.0, nugget};
  }
  static KernelSpec gaussian(double bandwidth, double nugget = 0.0) {
    return {KernelFamily::Gaussian, 1.0, 1, bandwidth, nugget};
  }

  void validate() const;
};

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y, bool same_point);

/// G(i,j) = k(X_i, X_j) with the nugget on the diagonal. Exactly symmetric.
Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X);

/// Entry (i,j) = k(A_i, B_j) without nugget.
Eigen::MatrixXd gram_cross(const KernelSpec& spec, const Eigen::MatrixXd& A,
                           const Eigen::MatrixXd& B);

}  // namespace kcblb
