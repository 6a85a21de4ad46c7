#include "dshape/world.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dshape/error.hpp"
#include "text.hpp"

namespace dshape {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw LoadError("game spec: " + where + ": " + what);
}

void reject_unknown_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                         const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(where, "unknown key \"" + key + "\"");
    }
  }
}

const Json& require(const Json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing field \"") + key + "\"");
  return *it;
}

std::string require_string(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_string()) fail(where, std::string("field \"") + key + "\" must be a string");
  std::string s = v.get<std::string>();
  if (text::trim(s).empty()) fail(where, std::string("field \"") + key + "\" is empty");
  return s;
}

bool require_bool(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_boolean()) fail(where, std::string("field \"") + key + "\" must be a boolean");
  return v.get<bool>();
}

const Json& require_array(const Json& obj, const char* key, const std::string& where) {
  const Json& v = require(obj, key, where);
  if (!v.is_array()) fail(where, std::string("field \"") + key + "\" must be an array");
  return v;
}

// Display names end up as knowledge-graph entities, so they must survive the
// textual edge format.
void check_display_name(const std::string& name, const std::string& where) {
  for (std::string_view bad : {",", "--", "->", "→", "\n", "#"}) {
    if (name.find(bad) != std::string::npos) {
      fail(where, "name \"" + name + "\" contains reserved sequence \"" + std::string(bad) + "\"");
    }
  }
}

template <typename T>
const T* find_by_id(const std::vector<T>& items, std::string_view id) {
  for (const auto& item : items) {
    if (item.id == id) return &item;
  }
  return nullptr;
}

std::string lower_name(const std::string& s) { return text::normalize(s); }

std::string join_names(const std::vector<std::string>& names) {
  if (names.empty()) return "";
  if (names.size() == 1) return names[0];
  std::string out;
  for (std::size_t i = 0; i + 1 < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out + " and " + names.back();
}

void validate(const GameSpec& spec) {
  if (spec.rooms.empty()) fail("rooms", "at least one room is required");

  std::set<std::string> ids;
  auto claim = [&](const std::string& id, const std::string& where) {
    if (!ids.insert(id).second) fail(where, "duplicate id \"" + id + "\"");
  };
  std::set<std::string> room_names;
  for (const auto& r : spec.rooms) {
    claim(r.id, "room \"" + r.id + "\"");
    if (!room_names.insert(lower_name(r.name)).second) {
      fail("room \"" + r.id + "\"", "duplicate room name \"" + r.name + "\"");
    }
  }
  std::set<std::string> entity_names;
  for (const auto& o : spec.objects) {
    claim(o.id, "object \"" + o.id + "\"");
    if (!entity_names.insert(lower_name(o.name)).second) {
      fail("object \"" + o.id + "\"", "duplicate entity name \"" + o.name + "\"");
    }
  }
  for (const auto& c : spec.characters) {
    claim(c.id, "character \"" + c.id + "\"");
    if (!entity_names.insert(lower_name(c.name)).second) {
      fail("character \"" + c.id + "\"", "duplicate entity name \"" + c.name + "\"");
    }
  }

  for (const auto& r : spec.rooms) {
    const std::string where = "room \"" + r.id + "\"";
    std::set<Direction> seen;
    for (const auto& [dir, dest] : r.exits) {
      if (!seen.insert(dir).second) fail(where, "duplicate exit " + std::string(to_string(dir)));
      const Room* other = find_by_id(spec.rooms, dest);
      if (other == nullptr) {
        fail(where, "exit " + std::string(to_string(dir)) + " leads to unknown room \"" + dest + "\"");
      }
      auto back = other->exit(opposite(dir));
      if (!back || *back != r.id) {
        fail(where, "asymmetric exit: " + r.id + " " + std::string(to_string(dir)) + "->" + dest +
                        " has no matching " + dest + " " + std::string(to_string(opposite(dir))) +
                        "->" + r.id);
      }
    }
  }
  for (const auto& o : spec.objects) {
    if (!find_by_id(spec.rooms, o.room)) {
      fail("object \"" + o.id + "\"", "unknown room \"" + o.room + "\"");
    }
  }
  for (const auto& c : spec.characters) {
    if (!find_by_id(spec.rooms, c.room)) {
      fail("character \"" + c.id + "\"", "unknown room \"" + c.room + "\"");
    }
  }
  if (!find_by_id(spec.rooms, spec.start_room)) {
    fail("start_room", "unknown room \"" + spec.start_room + "\"");
  }
  const Goal& g = spec.goal;
  if (g.verb != "kill") fail("goal", "unsupported verb \"" + g.verb + "\" (only \"kill\" is supported)");
  if (!find_by_id(spec.characters, g.target)) {
    fail("goal", "unknown target character \"" + g.target + "\"");
  }
  if (g.reward <= 0) fail("goal", "reward must be positive");
  if (g.required_object) {
    const GameObject* o = find_by_id(spec.objects, *g.required_object);
    if (!o) fail("goal", "unknown required object \"" + *g.required_object + "\"");
    if (!o->portable) fail("goal", "required object \"" + o->id + "\" is not portable");
  }
}

std::string object_name(const GameSpec& spec, const std::string& id) {
  return lower_name(spec.object(id).name);
}

std::string character_name(const GameSpec& spec, const std::string& id) {
  return lower_name(spec.character(id).name);
}

}  // namespace

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kNorth: return "north";
    case Direction::kSouth: return "south";
    case Direction::kEast: return "east";
    case Direction::kWest: return "west";
  }
  return "?";
}

std::optional<Direction> parse_direction(std::string_view s) {
  for (Direction d : kAllDirections) {
    if (to_string(d) == s) return d;
  }
  return std::nullopt;
}

Direction opposite(Direction d) {
  switch (d) {
    case Direction::kNorth: return Direction::kSouth;
    case Direction::kSouth: return Direction::kNorth;
    case Direction::kEast: return Direction::kWest;
    case Direction::kWest: return Direction::kEast;
  }
  return d;
}

std::optional<std::string> Room::exit(Direction d) const {
  for (const auto& [dir, dest] : exits) {
    if (dir == d) return dest;
  }
  return std::nullopt;
}

const Room& GameSpec::room(std::string_view id) const {
  if (const Room* r = find_by_id(rooms, id)) return *r;
  throw ContractError("unknown room id \"" + std::string(id) + "\"");
}

const GameObject& GameSpec::object(std::string_view id) const {
  if (const GameObject* o = find_by_id(objects, id)) return *o;
  throw ContractError("unknown object id \"" + std::string(id) + "\"");
}

const Character& GameSpec::character(std::string_view id) const {
  if (const Character* c = find_by_id(characters, id)) return *c;
  throw ContractError("unknown character id \"" + std::string(id) + "\"");
}

bool GameSpec::has_room(std::string_view id) const { return find_by_id(rooms, id) != nullptr; }
bool GameSpec::has_object(std::string_view id) const { return find_by_id(objects, id) != nullptr; }
bool GameSpec::has_character(std::string_view id) const {
  return find_by_id(characters, id) != nullptr;
}

GameSpec load_game_spec(std::string_view document) {
  Json doc;
  try {
    doc = Json::parse(document);
  } catch (const Json::parse_error& e) {
    throw LoadError(std::string("game spec: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("document", "top level must be an object");
  reject_unknown_keys(doc, {"rooms", "objects", "characters", "goal", "start_room"}, "document");

  GameSpec spec;
  const Json& rooms = require_array(doc, "rooms", "document");
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const Json& jr = rooms[i];
    std::string where = "rooms[" + std::to_string(i) + "]";
    if (!jr.is_object()) fail(where, "must be an object");
    reject_unknown_keys(jr, {"id", "name", "description", "exits"}, where);
    Room r;
    r.id = require_string(jr, "id", where);
    where = "room \"" + r.id + "\"";
    r.name = require_string(jr, "name", where);
    check_display_name(r.name, where);
    const Json& desc = require(jr, "description", where);
    if (!desc.is_string()) fail(where, "field \"description\" must be a string");
    r.description = desc.get<std::string>();
    const Json& exits = require(jr, "exits", where);
    if (!exits.is_object()) fail(where, "field \"exits\" must be an object");
    for (const auto& [key, dest] : exits.items()) {
      auto dir = parse_direction(key);
      if (!dir) fail(where, "unknown exit direction \"" + key + "\"");
      if (!dest.is_string()) fail(where, "exit " + key + " must name a room id");
      r.exits.emplace_back(*dir, dest.get<std::string>());
    }
    spec.rooms.push_back(std::move(r));
  }

  const Json& objects = require_array(doc, "objects", "document");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const Json& jo = objects[i];
    std::string where = "objects[" + std::to_string(i) + "]";
    if (!jo.is_object()) fail(where, "must be an object");
    reject_unknown_keys(jo, {"id", "name", "room", "portable"}, where);
    GameObject o;
    o.id = require_string(jo, "id", where);
    where = "object \"" + o.id + "\"";
    o.name = require_string(jo, "name", where);
    check_display_name(o.name, where);
    o.room = require_string(jo, "room", where);
    o.portable = require_bool(jo, "portable", where);
    spec.objects.push_back(std::move(o));
  }

  const Json& characters = require_array(doc, "characters", "document");
  for (std::size_t i = 0; i < characters.size(); ++i) {
    const Json& jc = characters[i];
    std::string where = "characters[" + std::to_string(i) + "]";
    if (!jc.is_object()) fail(where, "must be an object");
    reject_unknown_keys(jc, {"id", "name", "room", "hostile"}, where);
    Character c;
    c.id = require_string(jc, "id", where);
    where = "character \"" + c.id + "\"";
    c.name = require_string(jc, "name", where);
    check_display_name(c.name, where);
    c.room = require_string(jc, "room", where);
    c.hostile = require_bool(jc, "hostile", where);
    spec.characters.push_back(std::move(c));
  }

  const Json& goal = require(doc, "goal", "document");
  if (!goal.is_object()) fail("goal", "must be an object");
  reject_unknown_keys(goal, {"verb", "target", "requires", "reward"}, "goal");
  spec.goal.verb = text::normalize(require_string(goal, "verb", "goal"));
  spec.goal.target = require_string(goal, "target", "goal");
  const Json& req = require(goal, "requires", "goal");
  if (req.is_string()) {
    spec.goal.required_object = req.get<std::string>();
  } else if (!req.is_null()) {
    fail("goal", "field \"requires\" must be an object id or null");
  }
  const Json& reward = require(goal, "reward", "goal");
  if (!reward.is_number_integer()) fail("goal", "field \"reward\" must be an integer");
  spec.goal.reward = reward.get<int>();

  spec.start_room = require_string(doc, "start_room", "document");
  validate(spec);
  return spec;
}

GameSpec load_game_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("game spec: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_game_spec(buf.str());
}

std::string dump_game_spec(const GameSpec& spec) {
  Json doc;
  doc["rooms"] = Json::array();
  for (const auto& r : spec.rooms) {
    Json exits = Json::object();
    for (const auto& [dir, dest] : r.exits) exits[std::string(to_string(dir))] = dest;
    doc["rooms"].push_back(
        {{"id", r.id}, {"name", r.name}, {"description", r.description}, {"exits", exits}});
  }
  doc["objects"] = Json::array();
  for (const auto& o : spec.objects) {
    doc["objects"].push_back(
        {{"id", o.id}, {"name", o.name}, {"room", o.room}, {"portable", o.portable}});
  }
  doc["characters"] = Json::array();
  for (const auto& c : spec.characters) {
    doc["characters"].push_back(
        {{"id", c.id}, {"name", c.name}, {"room", c.room}, {"hostile", c.hostile}});
  }
  Json goal = {{"verb", spec.goal.verb}, {"target", spec.goal.target}};
  goal["requires"] = spec.goal.required_object ? Json(*spec.goal.required_object) : Json(nullptr);
  goal["reward"] = spec.goal.reward;
  doc["goal"] = goal;
  doc["start_room"] = spec.start_room;
  return doc.dump(2) + "\n";
}

bool operator==(const Action& a, const Action& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ActionKind::kGo: return a.direction == b.direction;
    case ActionKind::kGet:
    case ActionKind::kDrop: return a.object == b.object;
    case ActionKind::kKillWith: return a.character == b.character && a.object == b.object;
    case ActionKind::kKill: return a.character == b.character;
  }
  return false;
}

std::string action_text(const GameSpec& spec, const Action& action) {
  switch (action.kind) {
    case ActionKind::kGo: return "go " + std::string(to_string(action.direction));
    case ActionKind::kGet: return "get " + object_name(spec, action.object);
    case ActionKind::kDrop: return "drop " + object_name(spec, action.object);
    case ActionKind::kKillWith:
      return "kill " + character_name(spec, action.character) + " with " +
             object_name(spec, action.object);
    case ActionKind::kKill: return "kill " + character_name(spec, action.character);
  }
  return {};
}

std::vector<Action> action_universe(const GameSpec& spec) {
  std::vector<Action> out;
  for (Direction d : kAllDirections) out.push_back(Action::go(d));
  for (const auto& o : spec.objects) {
    if (o.portable) out.push_back(Action::get(o.id));
  }
  for (const auto& o : spec.objects) {
    if (o.portable) out.push_back(Action::drop(o.id));
  }
  for (const auto& c : spec.characters) {
    for (const auto& o : spec.objects) {
      if (o.portable) out.push_back(Action::kill_with(c.id, o.id));
    }
  }
  for (const auto& c : spec.characters) out.push_back(Action::kill(c.id));
  return out;
}

std::optional<Action> parse_action(const GameSpec& spec, std::string_view typed) {
  const std::string wanted = text::normalize(typed);
  for (const Action& a : action_universe(spec)) {
    if (action_text(spec, a) == wanted) return a;
  }
  return std::nullopt;
}

std::string describe_room(const GameSpec& spec, const WorldState& state) {
  const Room& room = spec.room(state.current_room);
  std::string out = room.name + ".";
  if (!room.description.empty()) out += " " + room.description;

  std::vector<std::string> exits;
  for (const auto& [dir, dest] : room.exits) {
    exits.push_back(std::string(to_string(dir)) + " to the " + spec.room(dest).name);
  }
  out += exits.empty() ? " There are no exits." : " Exits: " + text::join(exits, ", ") + ".";

  std::vector<std::string> seen;
  for (const auto& o : spec.objects) {
    auto it = state.object_locations.find(o.id);
    if (it != state.object_locations.end() && it->second == room.id) {
      seen.push_back("a " + lower_name(o.name));
    }
  }
  if (!seen.empty()) out += " You see " + join_names(seen) + ".";

  for (const auto& c : spec.characters) {
    if (c.room != room.id) continue;
    auto it = state.character_alive.find(c.id);
    const bool alive = it == state.character_alive.end() || it->second;
    if (alive) {
      out += " A " + std::string(c.hostile ? "hostile " : "") + lower_name(c.name) + " is here.";
    } else {
      out += " The " + lower_name(c.name) + " lies dead.";
    }
  }
  return out;
}

std::string describe_inventory(const GameSpec& spec, const WorldState& state) {
  std::vector<std::string> held;
  for (const auto& o : spec.objects) {
    if (state.inventory.count(o.id)) held.push_back("a " + lower_name(o.name));
  }
  if (held.empty()) return "You are carrying nothing.";
  return "You are carrying " + join_names(held) + ".";
}

Reset initial_state(const GameSpec& spec) {
  WorldState state;
  state.current_room = spec.start_room;
  for (const auto& o : spec.objects) state.object_locations[o.id] = o.room;
  for (const auto& c : spec.characters) state.character_alive[c.id] = true;

  ObservationBundle obs;
  obs.room_description = describe_room(spec, state);
  obs.inventory_text = describe_inventory(spec, state);
  return {std::move(state), std::move(obs)};
}

std::vector<Action> valid_actions(const GameSpec& spec, const WorldState& state) {
  std::vector<Action> out;
  if (state.done) return out;
  const Room& room = spec.room(state.current_room);
  for (const auto& [dir, _] : room.exits) out.push_back(Action::go(dir));
  for (const auto& o : spec.objects) {
    if (o.portable && state.object_locations.at(o.id) == room.id) out.push_back(Action::get(o.id));
  }
  for (const auto& o : spec.objects) {
    if (state.inventory.count(o.id)) out.push_back(Action::drop(o.id));
  }
  std::vector<const Character*> present;
  for (const auto& c : spec.characters) {
    if (c.room == room.id && state.character_alive.at(c.id)) present.push_back(&c);
  }
  for (const Character* c : present) {
    for (const auto& o : spec.objects) {
      if (state.inventory.count(o.id)) out.push_back(Action::kill_with(c->id, o.id));
    }
  }
  for (const Character* c : present) out.push_back(Action::kill(c->id));
  return out;
}

StepResult step(const GameSpec& spec, const WorldState& state, const Action& action,
                int step_cap) {
  if (step_cap < 1) throw ContractError("step_cap must be positive");
  if (state.done) throw InvalidActionError("episode is over; no further actions accepted");
  const auto valid = valid_actions(spec, state);
  if (std::find(valid.begin(), valid.end(), action) == valid.end()) {
    throw InvalidActionError("action \"" + action_text(spec, action) + "\" is not valid in room \"" +
                             state.current_room + "\"");
  }

  StepResult result;
  WorldState& next = result.state;
  next = state;
  std::string feedback;

  switch (action.kind) {
    case ActionKind::kGo: {
      next.current_room = *spec.room(state.current_room).exit(action.direction);
      feedback = "You go " + std::string(to_string(action.direction)) + " to the " +
                 spec.room(next.current_room).name + ".";
      break;
    }
    case ActionKind::kGet:
      next.object_locations[action.object] = std::string(kHeld);
      next.inventory.insert(action.object);
      feedback = "You take the " + object_name(spec, action.object) + ".";
      break;
    case ActionKind::kDrop:
      next.object_locations[action.object] = next.current_room;
      next.inventory.erase(action.object);
      feedback = "You drop the " + object_name(spec, action.object) + ".";
      break;
    case ActionKind::kKillWith:
    case ActionKind::kKill: {
      const Goal& goal = spec.goal;
      const std::string victim = character_name(spec, action.character);
      bool success = false;
      if (action.character == goal.target) {
        if (!goal.required_object) {
          success = true;
        } else if (action.kind == ActionKind::kKillWith) {
          success = action.object == *goal.required_object;
        }
      }
      if (success) {
        next.character_alive[action.character] = false;
        result.reward = goal.reward;
        result.won = true;
        next.done = true;
        feedback = action.kind == ActionKind::kKillWith
                       ? "You kill the " + victim + " with the " + object_name(spec, action.object) + "."
                       : "You kill the " + victim + ".";
      } else if (action.kind == ActionKind::kKill) {
        feedback = "You attack the " + victim + " with your bare hands, but it is unharmed.";
      } else {
        feedback = "The " + object_name(spec, action.object) + " has no effect on the " + victim + ".";
      }
      break;
    }
  }

  next.steps_taken = state.steps_taken + 1;
  if (next.steps_taken >= step_cap) next.done = true;
  result.done = next.done;

  result.observation.room_description = describe_room(spec, next);
  result.observation.inventory_text = describe_inventory(spec, next);
  result.observation.last_action_feedback = std::move(feedback);
  result.observation.last_action_text = action_text(spec, action);
  return result;
}

}  // namespace dshape
