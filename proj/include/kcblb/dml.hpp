#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kcblb/data.hpp"
#include "kcblb/kernels.hpp"
#include "kcblb/rng.hpp"
#include "kcblb/svm.hpp"

namespace kcblb::dml {

struct DMLConfig {
  int n_folds = 5;
  double svm_cost = 1.0;
  double svr_epsilon = 0.1;
  KernelSpec kernel = KernelSpec::linear();
  double propensity_clip = 0.01;
  int platt_max_iter = 100;
  /// Fold re-draws allowed when a training complement lacks an arm.
  int max_fold_attempts = 10;

  void validate() const;
};

/// Uniform random permutation of 0..n-1 cut into K contiguous chunks whose
/// sizes differ by at most one (larger chunks first). Throws
/// Error(TooManyFolds) when K > n.
std::vector<std::vector<Index>> kfold_split(RngStream& rng, Index n, int K);

/// Nuisance predictions at held-out units.
struct Nuisances {
  Eigen::VectorXd propensity;  // pi(X_i) = P(A = 1 | X_i), already clipped
  Eigen::VectorXd m1;
  Eigen::VectorXd m0;
};

/// Trains pi (SVM + Platt) and m_1, m_0 (per-arm SVR) on `train` rows and
/// predicts on `eval` rows.
using NuisanceLearner =
    std::function<Nuisances(const Dataset& train, const Dataset& eval, const DMLConfig& cfg)>;

Nuisances svm_nuisances(const Dataset& train, const Dataset& eval, const DMLConfig& cfg);

struct CrossFit {
  Contribution contributions;  // original unit order
  Nuisances nuisances;         // original unit order
  std::vector<std::vector<Index>> folds;
  /// Training rows used for each fold's models.
  std::vector<std::vector<Index>> training_sets;
  /// Fold that produced unit i's prediction.
  std::vector<int> fold_of;
  int attempts = 0;
};

/// theta_i = psi_i(1) - psi_i(0), psi_i(a) = m_a + 1(A_i = a)(Y_i - m_a) / pi_a.
Contribution aipw_contributions(const Dataset& d, const Nuisances& nu);

CrossFit cross_fit(const Dataset& d, const DMLConfig& cfg, RngStream& rng,
                   const NuisanceLearner& learner = svm_nuisances);

/// Cross-fitting over caller-supplied folds, which must partition 0..n-1.
CrossFit cross_fit_folds(const Dataset& d, const DMLConfig& cfg,
                         std::vector<std::vector<Index>> folds,
                         const NuisanceLearner& learner = svm_nuisances);

/// Cross-fitted DML contributions with SVM nuisances.
Contribution dml_contributions(const Dataset& d, const DMLConfig& cfg, RngStream& rng);

}  // namespace kcblb::dml
