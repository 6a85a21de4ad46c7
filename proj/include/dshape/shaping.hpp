#pragma once

#include <set>

#include "dshape/kg.hpp"

namespace dshape {

inline constexpr double kDefaultShapingBonus = 2.0;

// Per-episode accounting of target edges that have already paid out.
struct ShapingState {
  std::set<Triple> matched;
  double bonus_per_edge = kDefaultShapingBonus;

  static ShapingState fresh(double bonus_per_edge);
};

struct ShapingStep {
  double bonus = 0.0;
  ShapingState state;
};

// Pays bonus_per_edge for every target edge present in the internal graph
// that has not paid out yet this episode. Edges that later disappear from the
// internal graph are not clawed back.
ShapingStep shaping_reward(const ShapingState& ss, const KnowledgeGraph& internal,
                           const KnowledgeGraph& target);

}  // namespace dshape
