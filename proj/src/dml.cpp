#include "kcblb/dml.hpp"

#include <algorithm>
#include <string>

#include "kcblb/error.hpp"
#include "kcblb/minimax.hpp"

namespace kcblb::dml {

void DMLConfig::validate() const {
  if (n_folds < 2) throw Error(ErrorCode::InvalidArgument, "dml: n_folds must be >= 2");
  if (!(svm_cost > 0.0)) throw Error(ErrorCode::InvalidArgument, "dml: svm_cost must be positive");
  if (!(svr_epsilon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "dml: svr_epsilon must be >= 0");
  if (!(propensity_clip > 0.0 && propensity_clip < 0.5))
    throw Error(ErrorCode::InvalidArgument, "dml: propensity_clip must lie in (0, 0.5)");
  if (platt_max_iter < 1) throw Error(ErrorCode::InvalidArgument, "dml: platt_max_iter must be >= 1");
  kernel.validate();
}

std::vector<std::vector<Index>> kfold_split(RngStream& rng, Index n, int K) {
  if (K < 1) throw Error(ErrorCode::InvalidArgument, "kfold_split: K must be positive");
  if (K > n)
    throw Error(ErrorCode::TooManyFolds,
                "kfold_split: " + std::to_string(K) + " folds for " + std::to_string(n) + " units");
  const auto perm = random_permutation(rng, n);
  std::vector<std::vector<Index>> folds(static_cast<std::size_t>(K));
  const Index base = n / K;
  const Index extra = n % K;
  std::size_t pos = 0;
  for (Index k = 0; k < K; ++k) {
    const Index size = base + (k < extra ? 1 : 0);
    auto& fold = folds[static_cast<std::size_t>(k)];
    fold.assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                perm.begin() + static_cast<std::ptrdiff_t>(pos + static_cast<std::size_t>(size)));
    pos += static_cast<std::size_t>(size);
  }
  return folds;
}

namespace {

Eigen::VectorXi plus_minus_labels(const Eigen::VectorXi& treatments) {
  return (2 * treatments.array() - 1).matrix();
}

Eigen::VectorXd arm_svr_predict(const Dataset& train, const Dataset& eval, int arm,
                                const DMLConfig& cfg) {
  std::vector<Index> rows;
  for (Index i = 0; i < train.n(); ++i)
    if (train.treatments[i] == arm) rows.push_back(i);
  const Dataset arm_data = train.subset(rows);
  const Eigen::MatrixXd K = gram(cfg.kernel, arm_data.covariates);
  const auto model = svm::fit_svr(K, arm_data.outcomes, cfg.svm_cost, cfg.svr_epsilon);
  return model.decision(gram_cross(cfg.kernel, eval.covariates, arm_data.covariates));
}

bool complements_usable(const Dataset& d, const std::vector<std::vector<Index>>& folds) {
  Index treated = d.treatments.sum();
  Index control = d.n() - treated;
  for (const auto& fold : folds) {
    Index t_out = 0;
    for (Index i : fold) t_out += d.treatments[i];
    const Index c_out = static_cast<Index>(fold.size()) - t_out;
    if (treated - t_out < 2 || control - c_out < 2) return false;
  }
  return true;
}

}  // namespace

Nuisances svm_nuisances(const Dataset& train, const Dataset& eval, const DMLConfig& cfg) {
  const Eigen::VectorXi labels = plus_minus_labels(train.treatments);
  const Eigen::MatrixXd K = gram(cfg.kernel, train.covariates);
  const auto clf = svm::fit_svm_classifier(K, labels, cfg.svm_cost);
  const auto platt = svm::platt_calibrate(clf.decision(K), labels, cfg.platt_max_iter);
  const Eigen::VectorXd f_eval = clf.decision(gram_cross(cfg.kernel, eval.covariates, train.covariates));

  Nuisances nu;
  nu.propensity = platt.probability(f_eval)
                      .cwiseMax(cfg.propensity_clip)
                      .cwiseMin(1.0 - cfg.propensity_clip);
  nu.m1 = arm_svr_predict(train, eval, 1, cfg);
  nu.m0 = arm_svr_predict(train, eval, 0, cfg);
  return nu;
}

Contribution aipw_contributions(const Dataset& d, const Nuisances& nu) {
  const Index n = d.n();
  if (nu.propensity.size() != n || nu.m1.size() != n || nu.m0.size() != n)
    throw Error(ErrorCode::DimensionMismatch, "aipw_contributions: nuisance sizes differ");
  const Eigen::VectorXd g1 = nu.propensity.cwiseInverse();
  const Eigen::VectorXd g0 = (1.0 - nu.propensity.array()).inverse().matrix();
  return minimax::augmented_score(d.outcomes, d.treatments, 1, nu.m1, g1) -
         minimax::augmented_score(d.outcomes, d.treatments, 0, nu.m0, g0);
}

CrossFit cross_fit(const Dataset& d, const DMLConfig& cfg, RngStream& rng,
                   const NuisanceLearner& learner) {
  cfg.validate();
  validate_dataset(d, TreatmentCoding::ZeroOne);
  const Index n = d.n();

  std::vector<std::vector<Index>> folds;
  int attempts = 1;
  for (;; ++attempts) {
    folds = kfold_split(rng, n, cfg.n_folds);
    if (complements_usable(d, folds)) break;
    if (attempts >= cfg.max_fold_attempts)
      throw Error(ErrorCode::SingleClassFold,
                  "dml: a training complement lacks an arm after " + std::to_string(attempts) +
                      " fold draws");
  }
  CrossFit out = cross_fit_folds(d, cfg, std::move(folds), learner);
  out.attempts = attempts;
  return out;
}

CrossFit cross_fit_folds(const Dataset& d, const DMLConfig& cfg,
                         std::vector<std::vector<Index>> folds, const NuisanceLearner& learner) {
  cfg.validate();
  validate_dataset(d, TreatmentCoding::ZeroOne);
  const Index n = d.n();
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto& fold : folds)
    for (Index i : fold) {
      if (i < 0 || i >= n || seen[static_cast<std::size_t>(i)])
        throw Error(ErrorCode::InvalidArgument, "cross_fit_folds: folds must partition the units");
      seen[static_cast<std::size_t>(i)] = 1;
    }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw Error(ErrorCode::InvalidArgument, "cross_fit_folds: folds must partition the units");
  if (!complements_usable(d, folds))
    throw Error(ErrorCode::SingleClassFold, "dml: a training complement lacks an arm");

  CrossFit out;
  out.folds = std::move(folds);
  out.attempts = 1;
  out.nuisances.propensity.resize(n);
  out.nuisances.m1.resize(n);
  out.nuisances.m0.resize(n);
  out.fold_of.assign(static_cast<std::size_t>(n), -1);
  std::vector<char> held(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < out.folds.size(); ++k) {
    const auto& fold = out.folds[k];
    std::fill(held.begin(), held.end(), 0);
    for (Index i : fold) held[static_cast<std::size_t>(i)] = 1;
    std::vector<Index> train_rows;
    train_rows.reserve(static_cast<std::size_t>(n) - fold.size());
    for (Index i = 0; i < n; ++i)
      if (!held[static_cast<std::size_t>(i)]) train_rows.push_back(i);

    const Nuisances nu = learner(d.subset(train_rows), d.subset(fold), cfg);
    for (std::size_t j = 0; j < fold.size(); ++j) {
      const Index i = fold[j];
      const auto jj = static_cast<Index>(j);
      out.nuisances.propensity[i] =
          std::clamp(nu.propensity[jj], cfg.propensity_clip, 1.0 - cfg.propensity_clip);
      out.nuisances.m1[i] = nu.m1[jj];
      out.nuisances.m0[i] = nu.m0[jj];
      out.fold_of[static_cast<std::size_t>(i)] = static_cast<int>(k);
    }
    out.training_sets.push_back(std::move(train_rows));
  }
  out.contributions = aipw_contributions(d, out.nuisances);
  return out;
}

Contribution dml_contributions(const Dataset& d, const DMLConfig& cfg, RngStream& rng) {
  return cross_fit(d, cfg, rng).contributions;
}

}  // namespace kcblb::dml
