#include "dshape/shaping.hpp"

#include "dshape/error.hpp"

namespace dshape {

ShapingState ShapingState::fresh(double bonus_per_edge) {
  if (!(bonus_per_edge >= 0.0)) throw ContractError("shaping bonus must be non-negative");
  return ShapingState{{}, bonus_per_edge};
}

ShapingStep shaping_reward(const ShapingState& ss, const KnowledgeGraph& internal,
                           const KnowledgeGraph& target) {
  for (const Triple& t : ss.matched) {
    if (!target.contains(t)) throw ContractError("shaping state holds an edge outside the target");
  }
  ShapingStep out{0.0, ss};
  std::size_t fresh_matches = 0;
  for (const Triple& t : overlap(internal, target)) {
    if (out.state.matched.insert(t).second) ++fresh_matches;
  }
  out.bonus = ss.bonus_per_edge * static_cast<double>(fresh_matches);
  return out;
}

}  // namespace dshape
