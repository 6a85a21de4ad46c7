#pragma once

#include <string>

#include "dshape/kg.hpp"
#include "dshape/world.hpp"

namespace dshape::testing {

inline std::string data_path(const std::string& rel) { return std::string(DSHAPE_DATA_DIR) + "/" + rel; }

inline const GameSpec& game1_mini() {
  static const GameSpec spec = load_game_spec_file(data_path("games/game1_mini.json"));
  return spec;
}

inline const GameSpec& game1() {
  static const GameSpec spec = load_game_spec_file(data_path("games/game1.json"));
  return spec;
}

inline KnowledgeGraph sword_dragon_target() {
  return KnowledgeGraph(KgKind::kTarget, {Triple("you", "have", "sword"), Triple("you", "kill", "dragon")});
}

// Walks a sequence of actions from the initial state.
inline WorldState play(const GameSpec& spec, const std::vector<Action>& actions, int cap = kDefaultStepCap) {
  WorldState s = initial_state(spec).state;
  for (const Action& a : actions) s = step(spec, s, a, cap).state;
  return s;
}

}  // namespace dshape::testing
