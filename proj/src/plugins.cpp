#include "kcblb/plugins.hpp"

namespace kcblb {

EstimatorPlugin minimax_plugin(const minimax::MinimaxConfig& cfg) {
  return {"minimax", [cfg](const Dataset& bag, RngStream&) {
            if (bag.coding == TreatmentCoding::PlusMinus)
              return minimax::minimax_contributions(to_zero_one(bag), cfg);
            return minimax::minimax_contributions(bag, cfg);
          }};
}

EstimatorPlugin dml_plugin(const dml::DMLConfig& cfg) {
  cfg.validate();
  return {"dml", [cfg](const Dataset& bag, RngStream& rng) {
            if (bag.coding == TreatmentCoding::PlusMinus)
              return dml::dml_contributions(to_zero_one(bag), cfg, rng);
            return dml::dml_contributions(bag, cfg, rng);
          }};
}

EstimatorPlugin aol_plugin(const aol::AolConfig& cfg, aol::Target target) {
  const char* name = target == aol::Target::Value ? "aol_value" : "aol_criterion";
  return {name, [cfg, target](const Dataset& bag, RngStream& rng) {
            if (bag.coding == TreatmentCoding::ZeroOne)
              return aol::aol_contributions(to_plus_minus(bag), cfg, target, rng);
            return aol::aol_contributions(bag, cfg, target, rng);
          }};
}

}  // namespace kcblb
