#include <gtest/gtest.h>

#include <algorithm>
#include <deque>
#include <map>
#include <random>

#include "dshape/error.hpp"
#include "dshape/world.hpp"
#include "fixtures.hpp"

using namespace dshape;
using dshape::testing::game1;
using dshape::testing::game1_mini;
using dshape::testing::play;

namespace {

std::vector<std::string> texts(const GameSpec& spec, const std::vector<Action>& actions) {
  std::vector<std::string> out;
  for (const auto& a : actions) out.push_back(action_text(spec, a));
  return out;
}

const char* kTwoRooms = R"({
  "rooms": [
    {"id": "a", "name": "Hall", "description": "A hall.", "exits": {"east": "b"}},
    {"id": "b", "name": "Den", "description": "A den.", "exits": {"west": "a"}}
  ],
  "objects": [{"id": "key", "name": "key", "room": "a", "portable": true}],
  "characters": [{"id": "rat", "name": "rat", "room": "b", "hostile": true}],
  "goal": {"verb": "kill", "target": "rat", "requires": "key", "reward": 15},
  "start_room": "a"
})";

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
  const auto pos = s.find(from);
  if (pos != std::string::npos) s.replace(pos, from.size(), to);
  return s;
}

void expect_load_error(const std::string& doc, const std::string& needle) {
  try {
    load_game_spec(doc);
    FAIL() << "expected LoadError containing " << needle;
  } catch (const LoadError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(GameSpecLoad, Game1MiniFixture) {
  const GameSpec& spec = game1_mini();
  ASSERT_EQ(spec.rooms.size(), 3u);
  EXPECT_EQ(spec.start_room, "courtyard");
  EXPECT_EQ(spec.room("courtyard").exit(Direction::kEast), "artillery");
  EXPECT_EQ(spec.room("courtyard").exit(Direction::kNorth), "dungeon");
  EXPECT_EQ(spec.object("sword").room, "artillery");
  EXPECT_EQ(spec.character("dragon").room, "dungeon");
  EXPECT_EQ(spec.goal.verb, "kill");
  EXPECT_EQ(spec.goal.target, "dragon");
  EXPECT_EQ(spec.goal.required_object, "sword");
  EXPECT_EQ(spec.goal.reward, 15);
}

TEST(GameSpecLoad, AsymmetricExitRejected) {
  std::string doc = replace_once(kTwoRooms, R"("exits": {"west": "a"})", R"("exits": {})");
  expect_load_error(doc, "asymmetric exit");
}

TEST(GameSpecLoad, EmptyRoomsRejected) {
  expect_load_error(R"({"rooms": [], "objects": [], "characters": [],
    "goal": {"verb": "kill", "target": "x", "requires": null, "reward": 1}, "start_room": "a"})",
                    "room");
}

TEST(GameSpecLoad, UnknownKeysAndReferencesRejected) {
  expect_load_error(replace_once(kTwoRooms, R"("start_room")", R"("colour": 1, "start_room")"), "colour");
  expect_load_error(replace_once(kTwoRooms, R"("room": "b", "hostile")", R"("room": "zz", "hostile")"), "zz");
  expect_load_error(replace_once(kTwoRooms, R"("requires": "key")", R"("requires": "spoon")"), "spoon");
  expect_load_error(replace_once(kTwoRooms, R"("reward": 15)", R"("reward": 0)"), "reward");
  expect_load_error(replace_once(kTwoRooms, R"("start_room": "a")", R"("start_room": "q")"), "start_room");
  expect_load_error(replace_once(kTwoRooms, R"("name": "key")", R"("name": "a--b")"), "reserved");
  expect_load_error(replace_once(kTwoRooms, R"("verb": "kill")", R"("verb": "hug")"), "hug");
  expect_load_error("not json", "");
}

TEST(GameSpecLoad, DumpRoundTrip) {
  const GameSpec again = load_game_spec(dump_game_spec(game1()));
  EXPECT_EQ(dump_game_spec(again), dump_game_spec(game1()));
  EXPECT_EQ(again.rooms.size(), game1().rooms.size());
}

TEST(InitialState, ResetsToStart) {
  const Reset r = initial_state(game1_mini());
  EXPECT_EQ(r.state.current_room, "courtyard");
  EXPECT_TRUE(r.state.inventory.empty());
  EXPECT_EQ(r.state.steps_taken, 0);
  EXPECT_FALSE(r.state.done);
  for (const auto& [id, alive] : r.state.character_alive) EXPECT_TRUE(alive) << id;
  EXPECT_EQ(r.observation.last_action_text, "");
  EXPECT_EQ(r.observation.last_action_feedback, "");
  const std::string& desc = r.observation.room_description;
  EXPECT_NE(desc.find("A wide courtyard paved with worn grey stones."), std::string::npos);
  EXPECT_NE(desc.find("east"), std::string::npos);
  EXPECT_NE(desc.find("north"), std::string::npos);
}

TEST(ValidActions, Game1MiniExamples) {
  const GameSpec& spec = game1_mini();
  EXPECT_EQ(texts(spec, valid_actions(spec, initial_state(spec).state)),
            (std::vector<std::string>{"go east", "go north"}));

  const WorldState artillery = play(spec, {Action::go(Direction::kEast)});
  EXPECT_EQ(texts(spec, valid_actions(spec, artillery)), (std::vector<std::string>{"go west", "get sword"}));

  // Holding the sword also allows dropping it.
  const WorldState dungeon = play(spec, {Action::go(Direction::kEast), Action::get("sword"),
                                         Action::go(Direction::kWest), Action::go(Direction::kNorth)});
  EXPECT_EQ(texts(spec, valid_actions(spec, dungeon)),
            (std::vector<std::string>{"go south", "drop sword", "kill dragon with sword", "kill dragon"}));
}

TEST(ValidActions, DoneStateIsEmpty) {
  WorldState s = initial_state(game1_mini()).state;
  s.done = true;
  EXPECT_TRUE(valid_actions(game1_mini(), s).empty());
}

TEST(Step, KillWithSwordWins) {
  const GameSpec& spec = game1_mini();
  const WorldState dungeon = play(spec, {Action::go(Direction::kEast), Action::get("sword"),
                                         Action::go(Direction::kWest), Action::go(Direction::kNorth)});
  const StepResult r = step(spec, dungeon, Action::kill_with("dragon", "sword"), kDefaultStepCap);
  EXPECT_EQ(r.reward, 15);
  EXPECT_TRUE(r.done);
  EXPECT_TRUE(r.won);
  EXPECT_FALSE(r.state.character_alive.at("dragon"));
}

TEST(Step, BareKillFails) {
  const GameSpec& spec = game1_mini();
  const WorldState dungeon = play(spec, {Action::go(Direction::kNorth)});
  const StepResult r = step(spec, dungeon, Action::kill("dragon"), kDefaultStepCap);
  EXPECT_EQ(r.reward, 0);
  EXPECT_FALSE(r.done);
  EXPECT_TRUE(r.state.character_alive.at("dragon"));
  EXPECT_EQ(r.state.steps_taken, dungeon.steps_taken + 1);
  EXPECT_NE(r.observation.last_action_feedback.find("unharmed"), std::string::npos);
  EXPECT_EQ(r.observation.last_action_text, "kill dragon");
}

TEST(Step, CapEndsEpisode) {
  const GameSpec& spec = game1_mini();
  WorldState s = initial_state(spec).state;
  s.steps_taken = kDefaultStepCap - 1;
  const StepResult r = step(spec, s, Action::go(Direction::kEast), kDefaultStepCap);
  EXPECT_TRUE(r.done);
  EXPECT_FALSE(r.won);
  EXPECT_EQ(r.reward, 0);
}

TEST(Step, WinOnCapStepStillPays) {
  const GameSpec& spec = game1_mini();
  WorldState s = play(spec, {Action::go(Direction::kEast), Action::get("sword"), Action::go(Direction::kWest),
                             Action::go(Direction::kNorth)});
  s.steps_taken = 9;
  const StepResult r = step(spec, s, Action::kill_with("dragon", "sword"), 10);
  EXPECT_EQ(r.reward, 15);
  EXPECT_TRUE(r.done);
}

TEST(Step, InvalidActionThrows) {
  const GameSpec& spec = game1_mini();
  const WorldState s = initial_state(spec).state;
  EXPECT_THROW(step(spec, s, Action::go(Direction::kSouth), kDefaultStepCap), InvalidActionError);
  EXPECT_THROW(step(spec, s, Action::get("sword"), kDefaultStepCap), InvalidActionError);
  WorldState done = s;
  done.done = true;
  EXPECT_THROW(step(spec, done, Action::go(Direction::kEast), kDefaultStepCap), InvalidActionError);
}

TEST(ParseAction, MatchesUniverse) {
  const GameSpec& spec = game1_mini();
  for (const Action& a : action_universe(spec)) {
    const auto parsed = parse_action(spec, "  " + action_text(spec, a) + " ");
    ASSERT_TRUE(parsed) << action_text(spec, a);
    EXPECT_EQ(*parsed, a);
  }
  EXPECT_EQ(parse_action(spec, "Kill  Dragon WITH sword"), Action::kill_with("dragon", "sword"));
  EXPECT_FALSE(parse_action(spec, "dance"));
}

// Every state reachable from reset: listed actions are accepted and every
// other universe action is rejected.
TEST(WorldProperties, ValidActionsAgreeWithStep) {
  for (const GameSpec* spec : {&game1_mini(), &game1()}) {
    const auto universe = action_universe(*spec);
    std::deque<WorldState> queue{initial_state(*spec).state};
    std::vector<WorldState> seen{queue.front()};
    std::size_t checked = 0;
    while (!queue.empty() && checked < 3000) {
      WorldState s = queue.front();
      queue.pop_front();
      ++checked;
      const auto valid = valid_actions(*spec, s);
      for (const Action& a : universe) {
        const bool listed = std::find(valid.begin(), valid.end(), a) != valid.end();
        if (!listed) {
          EXPECT_THROW(step(*spec, s, a, 1000), InvalidActionError) << action_text(*spec, a);
          continue;
        }
        const StepResult r = step(*spec, s, a, 1000);
        if (r.done) continue;
        WorldState next = r.state;
        next.steps_taken = 0;
        if (std::find(seen.begin(), seen.end(), next) == seen.end()) {
          seen.push_back(next);
          queue.push_back(next);
        }
      }
    }
    EXPECT_GT(checked, 5u);
  }
}

TEST(WorldProperties, RandomEpisodesConserveAndStaySparse) {
  const GameSpec& spec = game1();
  std::mt19937_64 rng(7);
  for (int ep = 0; ep < 300; ++ep) {
    WorldState s = initial_state(spec).state;
    int total = 0;
    while (!s.done) {
      const auto valid = valid_actions(spec, s);
      const Action& a = valid[std::uniform_int_distribution<std::size_t>(0, valid.size() - 1)(rng)];
      const StepResult r1 = step(spec, s, a, kDefaultStepCap);
      const StepResult r2 = step(spec, s, a, kDefaultStepCap);
      ASSERT_EQ(r1.state, r2.state);
      ASSERT_EQ(r1.observation, r2.observation);
      ASSERT_EQ(r1.reward, r2.reward);
      total += r1.reward;
      s = r1.state;
      for (const auto& o : spec.objects) {
        const std::string& loc = s.object_locations.at(o.id);
        ASSERT_EQ(loc == kHeld, s.inventory.count(o.id) == 1) << o.id;
        if (loc != kHeld) ASSERT_TRUE(spec.has_room(loc));
      }
    }
    EXPECT_TRUE(total == 0 || total == spec.goal.reward);
    EXPECT_LE(s.steps_taken, kDefaultStepCap);
  }
}

TEST(WorldProperties, ExitsAreReversible) {
  for (const GameSpec* spec : {&game1_mini(), &game1()}) {
    for (const Room& room : spec->rooms) {
      for (const auto& [dir, dest] : room.exits) {
        WorldState s = initial_state(*spec).state;
        s.current_room = room.id;
        s = step(*spec, s, Action::go(dir), kDefaultStepCap).state;
        EXPECT_EQ(s.current_room, dest);
        s = step(*spec, s, Action::go(opposite(dir)), kDefaultStepCap).state;
        EXPECT_EQ(s.current_room, room.id);
      }
    }
  }
}

TEST(Directions, ParseAndOpposite) {
  for (Direction d : kAllDirections) {
    EXPECT_EQ(parse_direction(to_string(d)), d);
    EXPECT_EQ(opposite(opposite(d)), d);
  }
  EXPECT_FALSE(parse_direction("up"));
}
