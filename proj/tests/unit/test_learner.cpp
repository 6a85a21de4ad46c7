#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dshape/error.hpp"
#include "dshape/learner.hpp"
#include "fixtures.hpp"

using namespace dshape;
using dshape::testing::game1;
using dshape::testing::game1_mini;

namespace {

FeatureVector random_features(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  FeatureVector f;
  for (int i = 0; i < dim; ++i) f.values.push_back(rng() % 3 == 0 ? 0.0 : n(rng));
  return f;
}

ActionMask random_mask(int actions, std::mt19937_64& rng) {
  ActionMask m(static_cast<std::size_t>(actions), 0);
  while (std::count(m.begin(), m.end(), 1) == 0) {
    for (auto& v : m) v = rng() % 2;
  }
  return m;
}

PolicyParams gaussian_params(int d, int h, int a, std::mt19937_64& rng, double sd) {
  PolicyParams p(d, h, a);
  std::normal_distribution<double> n(0.0, sd);
  for (double& v : p.theta()) v = n(rng);
  return p;
}

}  // namespace

TEST(Featurize, DeterministicAndSensitive) {
  const GameSpec& spec = game1_mini();
  const Reset r = initial_state(spec);
  const KnowledgeGraph kg = update_internal(KnowledgeGraph(KgKind::kInternal), spec, r.state, r.observation);
  const FeatureVector a = featurize(r.observation, kg, 256, 1);
  EXPECT_EQ(a.size(), 256u);
  EXPECT_EQ(a, featurize(r.observation, kg, 256, 1));

  const StepResult s = step(spec, r.state, Action::go(Direction::kEast), kDefaultStepCap);
  const KnowledgeGraph kg2 = update_internal(kg, spec, s.state, s.observation);
  EXPECT_NE(featurize(s.observation, kg2, 256, 1), a);
  EXPECT_NE(featurize(r.observation, kg, 256, 2), a);
}

TEST(Featurize, EmptyInputsGiveZeroVector) {
  const FeatureVector f = featurize(ObservationBundle{}, KnowledgeGraph(KgKind::kInternal), 64, 0);
  EXPECT_EQ(f.values, std::vector<double>(64, 0.0));
}

TEST(Featurize, DimensionContract) {
  EXPECT_THROW(featurize({}, KnowledgeGraph(KgKind::kInternal), 10, 0), ContractError);
  EXPECT_THROW(featurize({}, KnowledgeGraph(KgKind::kInternal), 0, 0), ContractError);
}

TEST(Featurize, EachChannelMatters) {
  ObservationBundle base{"room", "inv", "feedback", "action"};
  const KnowledgeGraph kg(KgKind::kInternal);
  const FeatureVector f0 = featurize(base, kg, 128, 3);
  for (int c = 0; c < 4; ++c) {
    ObservationBundle o = base;
    std::string* fields[] = {&o.room_description, &o.inventory_text, &o.last_action_feedback, &o.last_action_text};
    *fields[c] += " changed";
    EXPECT_NE(featurize(o, kg, 128, 3), f0) << c;
  }
  const KnowledgeGraph kg2(KgKind::kInternal, {Triple("you", "have", "sword")});
  EXPECT_NE(featurize(base, kg2, 128, 3), f0);
}

TEST(PolicyParamsInit, LayoutAndRange) {
  const PolicyParams p = PolicyParams::random(8, 4, 3, 42);
  EXPECT_EQ(p.theta().size(), PolicyParams::parameter_count(8, 4, 3));
  EXPECT_EQ(p.theta().size(), 8u * 4 + 4 + 3 * 4 + 3 + 4 + 1);
  for (double v : p.theta()) EXPECT_LE(std::abs(v), 0.05);
  for (std::size_t i = p.b1_offset(); i < p.wp_offset(); ++i) EXPECT_EQ(p.theta()[i], 0.0);
  EXPECT_EQ(p.theta()[p.bv_offset()], 0.0);
  EXPECT_EQ(p, PolicyParams::random(8, 4, 3, 42));
  EXPECT_NE(p, PolicyParams::random(8, 4, 3, 43));
  EXPECT_TRUE(p.all_finite());
}

TEST(SelectAction, ForcedChoice) {
  std::mt19937_64 rng(1);
  const PolicyParams p = PolicyParams::random(8, 4, 5, 1);
  const FeatureVector f = random_features(8, rng);
  const ActionMask m{0, 0, 1, 0, 0};
  EXPECT_EQ(select_action(p, f, m, SelectMode::kGreedy, rng), 2);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(select_action(p, f, m, SelectMode::kSample, rng), 2);
}

TEST(SelectAction, EmptyMaskIsContractError) {
  std::mt19937_64 rng(1);
  const PolicyParams p(8, 4, 3);
  EXPECT_THROW(select_action(p, FeatureVector{std::vector<double>(8, 0.0)}, ActionMask{0, 0, 0},
                             SelectMode::kSample, rng),
               ContractError);
}

TEST(SelectAction, GreedyTieGoesToLowestIndex) {
  std::mt19937_64 rng(1);
  const PolicyParams p(8, 4, 4);
  const FeatureVector f{std::vector<double>(8, 1.0)};
  EXPECT_EQ(select_action(p, f, ActionMask{0, 1, 1, 1}, SelectMode::kGreedy, rng), 1);
}

TEST(SelectAction, ZeroParamsSampleUniformly) {
  std::mt19937_64 rng(99);
  const PolicyParams p(8, 4, 5);
  const FeatureVector f = random_features(8, rng);
  const ActionMask m{1, 0, 1, 1, 0};
  std::vector<int> counts(5, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(select_action(p, f, m, SelectMode::kSample, rng))];
  const double expected = n / 3.0;
  const double sigma = std::sqrt(n * (1.0 / 3.0) * (2.0 / 3.0));
  for (int i : {0, 2, 3}) EXPECT_NEAR(counts[static_cast<std::size_t>(i)], expected, 3 * sigma);
  EXPECT_EQ(counts[1], 0);
  EXPECT_EQ(counts[4], 0);
}

TEST(SelectAction, MaskingFuzz) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    const int actions = 1 + static_cast<int>(rng() % 8);
    const PolicyParams p = gaussian_params(8, 4, actions, rng, 3.0);
    const FeatureVector f = random_features(8, rng);
    const ActionMask m = random_mask(actions, rng);
    const Forward fw = forward(p, f, m);
    double total = 0.0;
    for (int a = 0; a < actions; ++a) {
      if (!m[static_cast<std::size_t>(a)]) EXPECT_EQ(fw.probs[static_cast<std::size_t>(a)], 0.0);
      total += fw.probs[static_cast<std::size_t>(a)];
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (int k = 0; k < 20; ++k) {
      const int s = select_action(p, f, m, SelectMode::kSample, rng);
      ASSERT_TRUE(m[static_cast<std::size_t>(s)]);
    }
    EXPECT_TRUE(m[static_cast<std::size_t>(select_action(p, f, m, SelectMode::kGreedy, rng))]);
  }
}

TEST(Returns, Discounting) {
  EXPECT_EQ(discounted_returns(std::vector<double>{7.0}, 0.9), std::vector<double>{7.0});
  const auto g = discounted_returns(std::vector<double>{0.0, 0.0, 15.0}, 0.9);
  ASSERT_EQ(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g[2], 15.0);
  EXPECT_DOUBLE_EQ(g[1], 13.5);
  EXPECT_DOUBLE_EQ(g[0], 0.81 * 15.0);
}

// Analytic gradients against central finite differences.
TEST(GradientCheck, HundredRandomInstances) {
  std::mt19937_64 rng(123);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int actions = 2 + static_cast<int>(rng() % 5);
    const PolicyParams p = gaussian_params(8, 4, actions, rng, 0.5);
    LossSample s;
    s.features = random_features(8, rng);
    s.mask = random_mask(actions, rng);
    std::vector<int> valid;
    for (int a = 0; a < actions; ++a) {
      if (s.mask[static_cast<std::size_t>(a)]) valid.push_back(a);
    }
    s.action = valid[rng() % valid.size()];
    s.target_return = n(rng) * 5.0;
    s.advantage = n(rng) * 2.0;
    const double vc = 0.5, ec = 0.01;

    std::vector<double> grad(p.theta().size(), 0.0);
    accumulate_gradient(p, s, vc, ec, 1.0, grad);

    const double eps = 1e-6;
    double diff2 = 0.0, norm2 = 0.0;
    PolicyParams q = p;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const double orig = q.theta()[i];
      q.theta()[i] = orig + eps;
      const double up = sample_loss(q, s, vc, ec);
      q.theta()[i] = orig - eps;
      const double down = sample_loss(q, s, vc, ec);
      q.theta()[i] = orig;
      const double numeric = (up - down) / (2 * eps);
      diff2 += (numeric - grad[i]) * (numeric - grad[i]);
      norm2 += std::max(numeric * numeric, grad[i] * grad[i]);
    }
    const double rel = std::sqrt(diff2) / std::max(std::sqrt(norm2), 1e-12);
    worst = std::max(worst, rel);
    EXPECT_LE(rel, 1e-4) << "trial " << trial;
  }
  RecordProperty("worst_relative_error", std::to_string(worst));
}

TEST(A2cUpdate, EmptyBatchIsNoOp) {
  const PolicyParams p = PolicyParams::random(8, 4, 3, 5);
  EXPECT_EQ(a2c_update(p, {}, A2cConfig{}), p);
}

TEST(A2cUpdate, UpdatesAndCounts) {
  std::mt19937_64 rng(5);
  const PolicyParams p = PolicyParams::random(8, 4, 3, 5);
  Trajectory t;
  t.steps.push_back({random_features(8, rng), 1, {1, 1, 1}, 3.0, true});
  const PolicyParams q = a2c_update(p, {t}, A2cConfig{});
  EXPECT_NE(q, p);
  EXPECT_EQ(q.update_count(), p.update_count() + 1);
  EXPECT_TRUE(q.all_finite());
}

// A one-step trajectory's value target is its reward, so repeated value-only
// updates pull V(s) to r.
TEST(A2cUpdate, OneStepValueTargetIsReward) {
  std::mt19937_64 rng(8);
  PolicyParams p = PolicyParams::random(8, 4, 2, 8);
  Trajectory t;
  t.steps.push_back({random_features(8, rng), 0, {1, 1}, 4.0, true});
  A2cConfig cfg;
  cfg.learning_rate = 0.05;
  cfg.entropy_coef = 0.0;
  for (int i = 0; i < 2000; ++i) p = a2c_update(p, {t}, cfg);
  EXPECT_NEAR(forward(p, t.steps[0].features, t.steps[0].mask).value, 4.0, 1e-3);
}

TEST(A2cUpdate, NonFiniteRewardNamesTrajectory) {
  std::mt19937_64 rng(5);
  const PolicyParams p = PolicyParams::random(8, 4, 3, 5);
  Trajectory good, bad;
  good.steps.push_back({random_features(8, rng), 0, {1, 1, 1}, 1.0, true});
  bad.steps.push_back({random_features(8, rng), 0, {1, 1, 1}, std::numeric_limits<double>::quiet_NaN(), true});
  try {
    a2c_update(p, {good, bad}, A2cConfig{});
    FAIL();
  } catch (const UpdateError& e) {
    EXPECT_EQ(e.trajectory(), 1u);
  }
}

// Two arms with rewards 1.0 and 0.3 from the same state; the better arm is
// found by enumerating both, and the learner must agree within 500 episodes.
TEST(A2cUpdate, TwoArmBandit) {
  const std::vector<double> arm_reward{0.3, 1.0};
  const int best = arm_reward[1] > arm_reward[0] ? 1 : 0;
  std::mt19937_64 rng(17);
  const FeatureVector f = random_features(8, rng);
  const ActionMask mask{1, 1};
  PolicyParams p = PolicyParams::random(8, 4, 2, 17);
  A2cConfig cfg;
  cfg.learning_rate = 0.05;
  int episodes = 0;
  for (; episodes < 500; ++episodes) {
    const int a = select_action(p, f, mask, SelectMode::kSample, rng);
    Trajectory t;
    t.steps.push_back({f, a, mask, arm_reward[static_cast<std::size_t>(a)], true});
    p = a2c_update(p, {t}, cfg);
    if (episodes >= 20 && select_action(p, f, mask, SelectMode::kGreedy, rng) == best &&
        forward(p, f, mask).probs[static_cast<std::size_t>(best)] > 0.9) {
      break;
    }
  }
  EXPECT_LT(episodes, 500);
  EXPECT_EQ(select_action(p, f, mask, SelectMode::kGreedy, rng), best);
}

TEST(ValueIteration, Game1Mini) {
  const OracleResult r = value_iteration(game1_mini(), 0.9, kDefaultStepCap);
  EXPECT_EQ(r.optimal_return, 15);
  ASSERT_EQ(r.path_length, 5);
  std::vector<std::string> path;
  for (const Action& a : r.path) path.push_back(action_text(game1_mini(), a));
  EXPECT_EQ(path, (std::vector<std::string>{"go east", "get sword", "go west", "go north", "kill dragon with sword"}));
  EXPECT_NEAR(r.discounted_value, 15.0 * std::pow(0.9, 4), 1e-12);
}

TEST(ValueIteration, PathReplaysToWin) {
  const GameSpec& spec = game1();
  const OracleResult r = value_iteration(spec, 0.9, kDefaultStepCap);
  ASSERT_TRUE(r.path_length);
  EXPECT_LE(*r.path_length, 12);
  WorldState s = initial_state(spec).state;
  int total = 0;
  for (const Action& a : r.path) {
    const StepResult sr = step(spec, s, a, kDefaultStepCap);
    total += sr.reward;
    s = sr.state;
  }
  EXPECT_EQ(total, 15);
  EXPECT_TRUE(s.done);
}

TEST(ValueIteration, ShortCapAndUnreachableGoal) {
  EXPECT_EQ(value_iteration(game1_mini(), 0.9, 4).optimal_return, 0);
  EXPECT_FALSE(value_iteration(game1_mini(), 0.9, 4).path_length);
  EXPECT_EQ(value_iteration(game1_mini(), 0.9, 5).optimal_return, 15);

  const GameSpec island = load_game_spec(R"({
    "rooms": [
      {"id": "a", "name": "Shore", "description": "Sand.", "exits": {}},
      {"id": "b", "name": "Island", "description": "Far away.", "exits": {}}
    ],
    "objects": [],
    "characters": [{"id": "crab", "name": "crab", "room": "b", "hostile": true}],
    "goal": {"verb": "kill", "target": "crab", "requires": null, "reward": 15},
    "start_room": "a"})");
  const OracleResult r = value_iteration(island, 0.9, kDefaultStepCap);
  EXPECT_EQ(r.optimal_return, 0);
  EXPECT_FALSE(r.path_length);
}

TEST(ValueIteration, StateBound) {
  EXPECT_THROW(value_iteration(game1(), 0.9, kDefaultStepCap, 10), OracleError);
}
