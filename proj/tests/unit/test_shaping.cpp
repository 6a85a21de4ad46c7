#include <gtest/gtest.h>

#include <random>

#include "dshape/error.hpp"
#include "dshape/shaping.hpp"
#include "fixtures.hpp"

using namespace dshape;
using dshape::testing::game1_mini;
using dshape::testing::sword_dragon_target;

namespace {

KnowledgeGraph internal(std::initializer_list<Triple> edges) { return KnowledgeGraph(KgKind::kInternal, edges); }

}  // namespace

TEST(ShapingReward, FirstMatchPaysOnce) {
  const KnowledgeGraph t = sword_dragon_target();
  const KnowledgeGraph kg = internal({Triple("you", "in", "artillery room"), Triple("you", "have", "sword")});
  const ShapingStep first = shaping_reward(ShapingState::fresh(2.0), kg, t);
  EXPECT_DOUBLE_EQ(first.bonus, 2.0);
  EXPECT_EQ(first.state.matched, (std::set<Triple>{Triple("you", "have", "sword")}));
  const ShapingStep second = shaping_reward(first.state, kg, t);
  EXPECT_DOUBLE_EQ(second.bonus, 0.0);
}

TEST(ShapingReward, EmptyTargetNeverPays) {
  const KnowledgeGraph kg = internal({Triple("you", "have", "sword")});
  EXPECT_DOUBLE_EQ(shaping_reward(ShapingState::fresh(2.0), kg, KnowledgeGraph(KgKind::kTarget)).bonus, 0.0);
}

TEST(ShapingReward, LostEdgeIsNotClawedBack) {
  const KnowledgeGraph t = sword_dragon_target();
  ShapingStep s = shaping_reward(ShapingState::fresh(2.0), internal({Triple("you", "have", "sword")}), t);
  s = shaping_reward(s.state, internal({}), t);
  EXPECT_DOUBLE_EQ(s.bonus, 0.0);
  EXPECT_EQ(s.state.matched.size(), 1u);
  s = shaping_reward(s.state, internal({Triple("you", "have", "sword")}), t);
  EXPECT_DOUBLE_EQ(s.bonus, 0.0);
}

TEST(ShapingReward, Contracts) {
  EXPECT_THROW(ShapingState::fresh(-1.0), ContractError);
  ShapingState bad = ShapingState::fresh(2.0);
  bad.matched.insert(Triple("a", "b", "c"));
  EXPECT_THROW(shaping_reward(bad, internal({}), sword_dragon_target()), ContractError);
}

// Random walks through the engine: the running total always equals the bonus
// times the final overlap and never exceeds bonus * |target|.
TEST(ShapingReward, EpisodeAccountingOnRandomWalks) {
  const GameSpec& spec = game1_mini();
  const KnowledgeGraph t(KgKind::kTarget, {Triple("you", "have", "sword"), Triple("you", "kill", "dragon"),
                                           Triple("you", "in", "dungeon")});
  std::mt19937_64 rng(11);
  for (int ep = 0; ep < 500; ++ep) {
    Reset r = initial_state(spec);
    KnowledgeGraph kg = update_internal(KnowledgeGraph(KgKind::kInternal), spec, r.state, r.observation);
    ShapingStep s = shaping_reward(ShapingState::fresh(2.0), kg, t);
    double total = s.bonus;
    WorldState state = r.state;
    while (!state.done) {
      const auto valid = valid_actions(spec, state);
      const Action a = valid[std::uniform_int_distribution<std::size_t>(0, valid.size() - 1)(rng)];
      StepResult sr = step(spec, state, a, 30);
      kg = update_internal(kg, spec, sr.state, sr.observation);
      s = shaping_reward(s.state, kg, t);
      total += s.bonus;
      state = sr.state;
    }
    // (you, in, *) is replaced on every move, so the matched set is the honest
    // measure here; have/kill edges never leave the internal graph.
    EXPECT_DOUBLE_EQ(total, 2.0 * static_cast<double>(s.state.matched.size()));
    EXPECT_LE(total, 2.0 * static_cast<double>(t.size()));
  }
}
