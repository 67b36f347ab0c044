#include "kcblb/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "kcblb/error.hpp"

namespace kcblb {

using Index = Eigen::Index;

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "linear") return KernelFamily::Linear;
  if (name == "polynomial") return KernelFamily::Polynomial;
  if (name == "gaussian") return KernelFamily::Gaussian;
  throw Error(ErrorCode::InvalidArgument, "unknown kernel family '" + name + "'");
}

const char* to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Linear: return "linear";
    case KernelFamily::Polynomial: return "polynomial";
    case KernelFamily::Gaussian: return "gaussian";
  }
  return "unknown";
}

void KernelSpec::validate() const {
  if (!(nugget >= 0.0) || !std::isfinite(nugget))
    throw Error(ErrorCode::InvalidArgument, "kernel nugget must be nonnegative");
  switch (family) {
    case KernelFamily::Linear:
      break;
    case KernelFamily::Polynomial:
      if (!(scale > 0.0) || !std::isfinite(scale))
        throw Error(ErrorCode::InvalidArgument, "polynomial kernel scale must be positive");
      if (degree < 1) throw Error(ErrorCode::InvalidArgument, "polynomial degree must be >= 1");
      break;
    case KernelFamily::Gaussian:
      if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
        throw Error(ErrorCode::InvalidArgument, "gaussian bandwidth must be positive");
      break;
  }
}

namespace {

double ipow(double base, int exp) {
  double out = 1.0;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

// Kernel value from the inner product (polynomial families) or the squared
// distance (Gaussian). No nugget.
double from_dot(const KernelSpec& spec, double dot) {
  if (spec.family == KernelFamily::Linear) return dot;
  return spec.scale * ipow(dot, spec.degree);
}

double from_sqdist(const KernelSpec& spec, double sq) {
  return std::exp(-sq / (2.0 * spec.bandwidth * spec.bandwidth));
}

// Copies the upper triangle into the lower one in tiles to stay in cache.
void mirror_upper(Eigen::MatrixXd& G) {
  constexpr Index kTile = 64;
  const Index n = G.rows();
  for (Index jb = 0; jb < n; jb += kTile)
    for (Index ib = jb; ib < n; ib += kTile) {
      const Index jend = std::min(n, jb + kTile);
      const Index iend = std::min(n, ib + kTile);
      for (Index j = jb; j < jend; ++j)
        for (Index i = std::max(ib, j + 1); i < iend; ++i) G(i, j) = G(j, i);
    }
}

}  // namespace

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> y, bool same_point) {
  if (x.size() != y.size())
    throw Error(ErrorCode::DimensionMismatch, "kernel_eval: argument lengths differ");
  double value = 0.0;
  if (spec.family == KernelFamily::Gaussian) {
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double diff = x[i] - y[i];
      sq += diff * diff;
    }
    value = from_sqdist(spec, sq);
  } else {
    double dot = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * y[i];
    value = from_dot(spec, dot);
  }
  const double nugget = spec.family == KernelFamily::Linear ? 0.0 : spec.nugget;
  return same_point ? value + nugget : value;
}

Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::MatrixXd& X) {
  spec.validate();
  const Index n = X.rows();
  Eigen::MatrixXd G(n, n);
  G.noalias() = X * X.transpose();
  if (spec.family == KernelFamily::Gaussian) {
    const Eigen::VectorXd sqnorm = G.diagonal();
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < j; ++i)
        G(i, j) = from_sqdist(spec, std::max(0.0, sqnorm[i] + sqnorm[j] - 2.0 * G(i, j)));
      G(j, j) = 1.0;
    }
  } else {
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i <= j; ++i) G(i, j) = from_dot(spec, G(i, j));
  }
  mirror_upper(G);
  const double nugget = spec.family == KernelFamily::Linear ? 0.0 : spec.nugget;
  if (nugget > 0.0) G.diagonal().array() += nugget;
  return G;
}

Eigen::MatrixXd gram_cross(const KernelSpec& spec, const Eigen::MatrixXd& A,
                           const Eigen::MatrixXd& B) {
  spec.validate();
  if (A.cols() != B.cols())
    throw Error(ErrorCode::DimensionMismatch, "gram_cross: column counts differ");
  Eigen::MatrixXd G(A.rows(), B.rows());
  G.noalias() = A * B.transpose();
  if (spec.family == KernelFamily::Gaussian) {
    const Eigen::VectorXd a2 = A.rowwise().squaredNorm();
    const Eigen::VectorXd b2 = B.rowwise().squaredNorm();
    for (Index j = 0; j < B.rows(); ++j)
      for (Index i = 0; i < A.rows(); ++i)
        G(i, j) = from_sqdist(spec, std::max(0.0, a2[i] + b2[j] - 2.0 * G(i, j)));
  } else if (spec.family == KernelFamily::Polynomial) {
    G = G.unaryExpr([&](double dot) { return from_dot(spec, dot); });
  }
  return G;
}

}  // namespace kcblb
