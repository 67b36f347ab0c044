#include "kcblb/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kcblb/error.hpp"

namespace kcblb::svm {

using Index = Eigen::Index;

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

// SMO with second-order working set selection for
//   min 1/2 a'Qa + p'a,  y'a = 0,  0 <= a <= C,
// Q_ij = y_i y_j K(src_i, src_j). Variables may map onto the same kernel row
// (the SVR doubles every point).
class SmoSolver {
 public:
  SmoSolver(const Eigen::MatrixXd& K, std::vector<Index> src, std::vector<int> y,
            Eigen::VectorXd p, double C)
      : K_(K), src_(std::move(src)), y_(std::move(y)), p_(std::move(p)), C_(C) {
    diag_.resize(static_cast<Index>(src_.size()));
    for (Index t = 0; t < diag_.size(); ++t) diag_[t] = K_(src_[static_cast<std::size_t>(t)], src_[static_cast<std::size_t>(t)]);
  }

  SvmModel solve(const SmoOptions& opts) {
    const auto l = static_cast<Index>(y_.size());
    alpha_ = Eigen::VectorXd::Zero(l);
    G_ = p_;

    SvmModel model;
    long iter = 0;
    for (; iter < opts.max_iter; ++iter) {
      Index i = -1;
      Index j = -1;
      if (select_working_set(opts.tol, i, j)) {
        model.converged = true;
        break;
      }
      update_pair(i, j);
    }
    model.iterations = iter;
    model.alpha = alpha_;
    model.bias = -compute_rho();
    return model;
  }

 private:
  // K is symmetric, so reading column src_i keeps the inner loops contiguous.
  const double* column(Index i) const { return K_.col(src_[static_cast<std::size_t>(i)]).data(); }
  double Q(Index i, Index j) const {
    return static_cast<double>(y_[static_cast<std::size_t>(i)] * y_[static_cast<std::size_t>(j)]) *
           column(i)[src_[static_cast<std::size_t>(j)]];
  }
  double Qcol(const double* col, int yi, Index t) const {
    return static_cast<double>(yi * y(t)) * col[src_[static_cast<std::size_t>(t)]];
  }
  int y(Index t) const { return y_[static_cast<std::size_t>(t)]; }
  bool at_upper(Index t) const { return alpha_[t] >= C_; }
  bool at_lower(Index t) const { return alpha_[t] <= 0.0; }

  bool select_working_set(double tol, Index& out_i, Index& out_j) const {
    const auto l = alpha_.size();
    double gmax = -kInf;
    double gmax2 = -kInf;
    Index gmax_idx = -1;
    for (Index t = 0; t < l; ++t) {
      if (y(t) == 1) {
        if (!at_upper(t) && -G_[t] >= gmax) {
          gmax = -G_[t];
          gmax_idx = t;
        }
      } else if (!at_lower(t) && G_[t] >= gmax) {
        gmax = G_[t];
        gmax_idx = t;
      }
    }
    if (gmax_idx < 0) return true;
    const Index i = gmax_idx;
    const double qii = diag_[i];
    const double* ci = column(i);
    const int yi = y(i);

    Index gmin_idx = -1;
    double obj_diff_min = kInf;
    for (Index t = 0; t < l; ++t) {
      const double qtt = diag_[t];
      if (y(t) == 1) {
        if (at_lower(t)) continue;
        const double grad_diff = gmax + G_[t];
        gmax2 = std::max(gmax2, G_[t]);
        if (grad_diff > 0.0) {
          const double quad = qii + qtt - 2.0 * yi * Qcol(ci, yi, t);
          const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= obj_diff_min) {
            gmin_idx = t;
            obj_diff_min = obj;
          }
        }
      } else {
        if (at_upper(t)) continue;
        const double grad_diff = gmax - G_[t];
        gmax2 = std::max(gmax2, -G_[t]);
        if (grad_diff > 0.0) {
          const double quad = qii + qtt + 2.0 * yi * Qcol(ci, yi, t);
          const double obj = -(grad_diff * grad_diff) / (quad > 0.0 ? quad : kTau);
          if (obj <= obj_diff_min) {
            gmin_idx = t;
            obj_diff_min = obj;
          }
        }
      }
    }
    if (gmax + gmax2 < tol || gmin_idx < 0) return true;
    out_i = i;
    out_j = gmin_idx;
    return false;
  }

  void update_pair(Index i, Index j) {
    const double old_ai = alpha_[i];
    const double old_aj = alpha_[j];
    const double qij = Q(i, j);
    const double qii = diag_[i];
    const double qjj = diag_[j];
    double& ai = alpha_[i];
    double& aj = alpha_[j];
    if (y(i) != y(j)) {
      double quad = qii + qjj + 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (-G_[i] - G_[j]) / quad;
      const double diff = ai - aj;
      ai += delta;
      aj += delta;
      if (diff > 0.0) {
        if (aj < 0.0) {
          aj = 0.0;
          ai = diff;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = -diff;
      }
      if (diff > 0.0) {
        if (ai > C_) {
          ai = C_;
          aj = C_ - diff;
        }
      } else if (aj > C_) {
        aj = C_;
        ai = C_ + diff;
      }
    } else {
      double quad = qii + qjj - 2.0 * qij;
      if (quad <= 0.0) quad = kTau;
      const double delta = (G_[i] - G_[j]) / quad;
      const double sum = ai + aj;
      ai -= delta;
      aj += delta;
      if (sum > C_) {
        if (ai > C_) {
          ai = C_;
          aj = sum - C_;
        }
      } else if (aj < 0.0) {
        aj = 0.0;
        ai = sum;
      }
      if (sum > C_) {
        if (aj > C_) {
          aj = C_;
          ai = sum - C_;
        }
      } else if (ai < 0.0) {
        ai = 0.0;
        aj = sum;
      }
    }
    const double dai = ai - old_ai;
    const double daj = aj - old_aj;
    const double* ci = column(i);
    const double* cj = column(j);
    const double wi = y(i) * dai;
    const double wj = y(j) * daj;
    for (Index t = 0; t < G_.size(); ++t) {
      const Index st = src_[static_cast<std::size_t>(t)];
      G_[t] += y(t) * (ci[st] * wi + cj[st] * wj);
    }
  }

  double compute_rho() const {
    double ub = kInf;
    double lb = -kInf;
    double sum_free = 0.0;
    int nr_free = 0;
    for (Index t = 0; t < alpha_.size(); ++t) {
      const double yg = y(t) * G_[t];
      if (at_upper(t)) {
        if (y(t) == -1) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else if (at_lower(t)) {
        if (y(t) == 1) ub = std::min(ub, yg);
        else lb = std::max(lb, yg);
      } else {
        ++nr_free;
        sum_free += yg;
      }
    }
    if (nr_free > 0) return sum_free / nr_free;
    return 0.5 * (ub + lb);
  }

  const Eigen::MatrixXd& K_;
  std::vector<Index> src_;
  std::vector<int> y_;
  Eigen::VectorXd p_;
  double C_;
  Eigen::VectorXd diag_;
  Eigen::VectorXd alpha_;
  Eigen::VectorXd G_;
};

}  // namespace

Eigen::VectorXd SvmModel::decision(const Eigen::MatrixXd& K_cross) const {
  Eigen::VectorXd f = K_cross * coef;
  f.array() += bias;
  return f;
}

SvmModel fit_svm_classifier(const Eigen::MatrixXd& K, const Eigen::VectorXi& labels, double cost,
                            const SmoOptions& opts) {
  const Index m = labels.size();
  if (K.rows() != m || K.cols() != m)
    throw Error(ErrorCode::DimensionMismatch, "fit_svm_classifier: K and labels differ");
  if (!(cost > 0.0)) throw Error(ErrorCode::InvalidArgument, "fit_svm_classifier: cost must be positive");
  bool has_pos = false;
  bool has_neg = false;
  std::vector<Index> src(static_cast<std::size_t>(m));
  std::vector<int> y(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    if (labels[i] != 1 && labels[i] != -1)
      throw Error(ErrorCode::BadTreatmentCode, "fit_svm_classifier: labels must be +-1");
    has_pos |= labels[i] == 1;
    has_neg |= labels[i] == -1;
    src[static_cast<std::size_t>(i)] = i;
    y[static_cast<std::size_t>(i)] = labels[i];
  }
  if (!has_pos || !has_neg)
    throw Error(ErrorCode::SingleClassFold, "fit_svm_classifier: only one class present");

  SmoSolver solver(K, std::move(src), std::move(y), Eigen::VectorXd::Constant(m, -1.0), cost);
  SvmModel model = solver.solve(opts);
  model.coef = model.alpha.array() * labels.cast<double>().array();
  return model;
}

SvmModel fit_svr(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double cost, double epsilon,
                 const SmoOptions& opts) {
  const Index m = y.size();
  if (K.rows() != m || K.cols() != m)
    throw Error(ErrorCode::DimensionMismatch, "fit_svr: K and y differ");
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "fit_svr: need at least two points");
  if (!(cost > 0.0)) throw Error(ErrorCode::InvalidArgument, "fit_svr: cost must be positive");
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "fit_svr: epsilon must be >= 0");

  std::vector<Index> src(static_cast<std::size_t>(2 * m));
  std::vector<int> sign(static_cast<std::size_t>(2 * m));
  Eigen::VectorXd p(2 * m);
  for (Index i = 0; i < m; ++i) {
    src[static_cast<std::size_t>(i)] = i;
    src[static_cast<std::size_t>(i + m)] = i;
    sign[static_cast<std::size_t>(i)] = 1;
    sign[static_cast<std::size_t>(i + m)] = -1;
    p[i] = epsilon - y[i];
    p[i + m] = epsilon + y[i];
  }
  SmoSolver solver(K, std::move(src), std::move(sign), std::move(p), cost);
  SvmModel model = solver.solve(opts);
  model.coef = model.alpha.head(m) - model.alpha.tail(m);
  return model;
}

double PlattModel::probability(double f) const {
  const double z = a * f + b;
  return z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
}

Eigen::VectorXd PlattModel::probability(const Eigen::VectorXd& decision) const {
  return decision.unaryExpr([this](double f) { return probability(f); });
}

namespace {

struct Targets {
  Eigen::VectorXd t;
  double n_pos = 0;
  double n_neg = 0;
};

Targets smoothed_targets(const Eigen::VectorXi& labels) {
  Targets out;
  for (Index i = 0; i < labels.size(); ++i) (labels[i] == 1 ? out.n_pos : out.n_neg) += 1.0;
  const double hi = (out.n_pos + 1.0) / (out.n_pos + 2.0);
  const double lo = 1.0 / (out.n_neg + 2.0);
  out.t = labels.unaryExpr([&](int l) { return l == 1 ? hi : lo; });
  return out;
}

double platt_value(double a, double b, const Eigen::VectorXd& f, const Eigen::VectorXd& t) {
  double value = 0.0;
  for (Index i = 0; i < f.size(); ++i) {
    const double z = f[i] * a + b;
    value += z >= 0.0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
  }
  return value;
}

}  // namespace

PlattObjective platt_objective(double a, double b, const Eigen::VectorXd& decision,
                               const Eigen::VectorXi& labels) {
  const auto tg = smoothed_targets(labels);
  PlattObjective out{platt_value(a, b, decision, tg.t), 0.0, 0.0};
  for (Index i = 0; i < decision.size(); ++i) {
    const double z = decision[i] * a + b;
    // d/dz of the per-point loss is t - P(y=+1).
    const double prob = z >= 0.0 ? std::exp(-z) / (1.0 + std::exp(-z)) : 1.0 / (1.0 + std::exp(z));
    out.grad_a += decision[i] * (tg.t[i] - prob);
    out.grad_b += tg.t[i] - prob;
  }
  return out;
}

PlattModel platt_calibrate(const Eigen::VectorXd& decision, const Eigen::VectorXi& labels,
                           int max_iter) {
  if (decision.size() != labels.size())
    throw Error(ErrorCode::DimensionMismatch, "platt_calibrate: sizes differ");
  const auto tg = smoothed_targets(labels);
  if (tg.n_pos == 0 || tg.n_neg == 0)
    throw Error(ErrorCode::SingleClassFold, "platt_calibrate: only one class present");

  PlattModel model;
  model.b = std::log((tg.n_neg + 1.0) / (tg.n_pos + 1.0));
  if (decision.maxCoeff() == decision.minCoeff()) return model;

  constexpr double kMinStep = 1e-10;
  constexpr double kSigma = 1e-12;
  const Eigen::VectorXd& f = decision;
  double fval = platt_value(model.a, model.b, f, tg.t);
  for (int iter = 0; iter < max_iter; ++iter) {
    double h11 = kSigma;
    double h22 = kSigma;
    double h21 = 0.0;
    double g1 = 0.0;
    double g2 = 0.0;
    for (Index i = 0; i < f.size(); ++i) {
      const double z = f[i] * model.a + model.b;
      double p;
      double q;
      if (z >= 0.0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
      const double d1 = tg.t[i] - p;
      g1 += f[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= kMinStep) {
      const double na = model.a + step * da;
      const double nb = model.b + step * db;
      const double nf = platt_value(na, nb, f, tg.t);
      if (nf < fval + 1e-4 * step * gd) {
        model.a = na;
        model.b = nb;
        fval = nf;
        break;
      }
      step *= 0.5;
    }
    if (step < kMinStep) break;
  }
  model.informative = model.a < 0.0;
  return model;
}

}  // namespace kcblb::svm
