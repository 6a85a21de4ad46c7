#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dshape {

enum class Direction { kNorth, kSouth, kEast, kWest };

inline constexpr std::array<Direction, 4> kAllDirections = {
    Direction::kNorth, Direction::kSouth, Direction::kEast, Direction::kWest};

std::string_view to_string(Direction d);
std::optional<Direction> parse_direction(std::string_view text);
Direction opposite(Direction d);

struct Room {
  std::string id;
  std::string name;
  std::string description;
  // Declaration order is preserved; valid_actions() lists exits in this order.
  std::vector<std::pair<Direction, std::string>> exits;

  std::optional<std::string> exit(Direction d) const;
};

struct GameObject {
  std::string id;
  std::string name;
  std::string room;
  bool portable = true;
};

struct Character {
  std::string id;
  std::string name;
  std::string room;
  bool hostile = false;
};

struct Goal {
  std::string verb;
  std::string target;                          // character id
  std::optional<std::string> required_object;  // portable object id
  int reward = 0;
};

struct GameSpec {
  std::vector<Room> rooms;
  std::vector<GameObject> objects;
  std::vector<Character> characters;
  Goal goal;
  std::string start_room;

  // Lookups throw ContractError for unknown ids.
  const Room& room(std::string_view id) const;
  const GameObject& object(std::string_view id) const;
  const Character& character(std::string_view id) const;
  bool has_room(std::string_view id) const;
  bool has_object(std::string_view id) const;
  bool has_character(std::string_view id) const;
};

// Parses and validates a game-spec JSON document. Throws LoadError naming the
// offending element on any schema or invariant violation.
GameSpec load_game_spec(std::string_view document);
GameSpec load_game_spec_file(const std::filesystem::path& path);

// Serializes back to the JSON schema accepted by load_game_spec.
std::string dump_game_spec(const GameSpec& spec);

inline constexpr std::string_view kHeld = "held";

struct WorldState {
  std::string current_room;
  std::set<std::string> inventory;
  std::map<std::string, std::string> object_locations;  // id -> room id or "held"
  std::map<std::string, bool> character_alive;
  int steps_taken = 0;
  bool done = false;

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

enum class ActionKind { kGo, kGet, kDrop, kKillWith, kKill };

struct Action {
  ActionKind kind = ActionKind::kGo;
  Direction direction = Direction::kNorth;  // kGo only
  std::string object;                       // kGet, kDrop, kKillWith
  std::string character;                    // kKillWith, kKill

  static Action go(Direction d) { return {ActionKind::kGo, d, {}, {}}; }
  static Action get(std::string o) { return {ActionKind::kGet, {}, std::move(o), {}}; }
  static Action drop(std::string o) { return {ActionKind::kDrop, {}, std::move(o), {}}; }
  static Action kill_with(std::string c, std::string o) {
    return {ActionKind::kKillWith, {}, std::move(o), std::move(c)};
  }
  static Action kill(std::string c) { return {ActionKind::kKill, {}, {}, std::move(c)}; }

  friend bool operator==(const Action& a, const Action& b);
};

// Player-facing command text, e.g. "kill dragon with sword".
std::string action_text(const GameSpec& spec, const Action& action);

// Every syntactically formed action for this spec, in the canonical template
// order (go, get, drop, kill-with, kill) with entities in declaration order.
// The learner's policy head has one output per entry.
std::vector<Action> action_universe(const GameSpec& spec);

// Matches a typed command against action_universe(); case and spacing are
// ignored.
std::optional<Action> parse_action(const GameSpec& spec, std::string_view text);

struct ObservationBundle {
  std::string room_description;
  std::string inventory_text;
  std::string last_action_feedback;
  std::string last_action_text;

  friend bool operator==(const ObservationBundle&, const ObservationBundle&) = default;
};

struct Reset {
  WorldState state;
  ObservationBundle observation;
};

Reset initial_state(const GameSpec& spec);

std::vector<Action> valid_actions(const GameSpec& spec, const WorldState& state);

struct StepResult {
  WorldState state;
  ObservationBundle observation;
  int reward = 0;
  bool done = false;
  bool won = false;
};

inline constexpr int kDefaultStepCap = 75;

StepResult step(const GameSpec& spec, const WorldState& state, const Action& action,
                int step_cap);

std::string describe_room(const GameSpec& spec, const WorldState& state);
std::string describe_inventory(const GameSpec& spec, const WorldState& state);

}  // namespace dshape
