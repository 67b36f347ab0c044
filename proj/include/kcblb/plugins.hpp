#pragma once

#include "kcblb/aol.hpp"
#include "kcblb/cblb.hpp"
#include "kcblb/dml.hpp"
#include "kcblb/minimax.hpp"

namespace kcblb {

/// ATE contributions from kernel minimax weights. Bags coded {-1,+1} are
/// recoded to {0,1} first.
EstimatorPlugin minimax_plugin(const minimax::MinimaxConfig& cfg = {});

/// Cross-fitted AIPW contributions with SVM nuisances.
EstimatorPlugin dml_plugin(const dml::DMLConfig& cfg = {});

/// AOL contributions; bags coded {0,1} are recoded to {-1,+1} first.
EstimatorPlugin aol_plugin(const aol::AolConfig& cfg, aol::Target target);

}  // namespace kcblb
