#include "kcblb/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>

#include "kcblb/error.hpp"

namespace kcblb {

namespace {

struct Probe {
  double alpha;
  double value;
  double slope;  // directional derivative
  Eigen::VectorXd x;
  Eigen::VectorXd grad;
};

class LineSearch {
 public:
  LineSearch(const Objective& f, const Eigen::VectorXd& x, const Eigen::VectorXd& dir,
             double f0, double slope0, const LbfgsOptions& opts)
      : f_(f), x_(x), dir_(dir), f0_(f0), slope0_(slope0), opts_(opts) {}

  // Strong-Wolfe search; returns false when no acceptable step was found.
  bool run(double alpha0, Probe& out) {
    Probe prev{0.0, f0_, slope0_, {}, {}};
    double alpha = alpha0;
    for (int i = 0; i < opts_.max_linesearch; ++i) {
      Probe cur = eval(alpha);
      if (cur.value > f0_ + opts_.c1 * alpha * slope0_ || (i > 0 && cur.value >= prev.value))
        return zoom(prev, cur, out);
      if (std::abs(cur.slope) <= -opts_.c2 * slope0_) {
        out = std::move(cur);
        return true;
      }
      if (cur.slope >= 0.0) return zoom(cur, prev, out);
      prev = std::move(cur);
      alpha *= 2.0;
    }
    return fallback(out);
  }

 private:
  Probe eval(double alpha) {
    Probe p;
    p.alpha = alpha;
    p.x = x_ + alpha * dir_;
    p.grad.resize(x_.size());
    p.value = f_(p.x, p.grad);
    if (!std::isfinite(p.value) || !p.grad.allFinite())
      throw Error(ErrorCode::NonFiniteObjective, "lbfgs: objective or gradient not finite");
    p.slope = p.grad.dot(dir_);
    if (p.value < f0_ + opts_.c1 * alpha * slope0_ && (!best_ || p.value < best_->value))
      best_ = p;
    return p;
  }

  static double cubic_min(const Probe& a, const Probe& b) {
    const double d1 = a.slope + b.slope - 3.0 * (a.value - b.value) / (a.alpha - b.alpha);
    const double disc = d1 * d1 - a.slope * b.slope;
    if (disc < 0.0) return 0.5 * (a.alpha + b.alpha);
    const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
    return b.alpha - (b.alpha - a.alpha) * (b.slope + d2 - d1) / (b.slope - a.slope + 2.0 * d2);
  }

  bool zoom(Probe lo, Probe hi, Probe& out) {
    for (int i = 0; i < opts_.max_linesearch; ++i) {
      const double left = std::min(lo.alpha, hi.alpha);
      const double right = std::max(lo.alpha, hi.alpha);
      const double width = right - left;
      if (width <= 1e-16 * std::max(1.0, right)) break;
      double alpha = cubic_min(lo, hi);
      if (!std::isfinite(alpha) || alpha < left + 0.1 * width || alpha > right - 0.1 * width)
        alpha = 0.5 * (left + right);
      Probe cur = eval(alpha);
      if (cur.value > f0_ + opts_.c1 * alpha * slope0_ || cur.value >= lo.value) {
        hi = std::move(cur);
      } else {
        if (std::abs(cur.slope) <= -opts_.c2 * slope0_) {
          out = std::move(cur);
          return true;
        }
        if (cur.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
        lo = std::move(cur);
      }
    }
    return fallback(out);
  }

  // Accept the best sufficient-decrease point even if curvature failed.
  bool fallback(Probe& out) {
    if (!best_) return false;
    out = *best_;
    return true;
  }

  const Objective& f_;
  const Eigen::VectorXd& x_;
  const Eigen::VectorXd& dir_;
  double f0_;
  double slope0_;
  const LbfgsOptions& opts_;
  std::optional<Probe> best_;
};

}  // namespace

LbfgsResult lbfgs_minimize(const Objective& f, const Eigen::VectorXd& x0,
                           const LbfgsOptions& opts) {
  if (!(opts.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "lbfgs: tol must be positive");

  LbfgsResult res;
  res.x = x0;
  Eigen::VectorXd grad(x0.size());
  res.value = f(res.x, grad);
  if (!std::isfinite(res.value) || !grad.allFinite())
    throw Error(ErrorCode::NonFiniteObjective, "lbfgs: objective not finite at x0");
  res.grad_inf_norm = x0.size() ? grad.lpNorm<Eigen::Infinity>() : 0.0;

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;
  std::vector<double> alpha_buf(static_cast<std::size_t>(opts.memory));

  for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
    if (res.grad_inf_norm <= opts.tol) {
      res.converged = true;
      return res;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = grad;
    const std::size_t m = s_hist.size();
    for (std::size_t i = m; i-- > 0;) {
      alpha_buf[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha_buf[i] * y_hist[i];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha_buf[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd dir = -q;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -grad;
      slope = -grad.squaredNorm();
    }

    const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / std::max(1e-300, grad.lpNorm<Eigen::Infinity>())) : 1.0;
    LineSearch ls(f, res.x, dir, res.value, slope, opts);
    Probe step;
    if (!ls.run(alpha0, step)) {
      if (s_hist.empty()) return res;  // steepest descent made no progress
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      continue;
    }

    Eigen::VectorXd s = step.x - res.x;
    Eigen::VectorXd y = step.grad - grad;
    const double sy = s.dot(y);
    res.x = std::move(step.x);
    grad = std::move(step.grad);
    res.value = step.value;
    res.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (static_cast<int>(s_hist.size()) == opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      rho_hist.push_back(1.0 / sy);
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
    }
  }
  res.converged = res.grad_inf_norm <= opts.tol;
  return res;
}

}  // namespace kcblb
