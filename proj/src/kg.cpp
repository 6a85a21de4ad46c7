#include "dshape/kg.hpp"

#include <algorithm>
#include <iterator>
#include <vector>

#include "dshape/error.hpp"
#include "text.hpp"

namespace dshape {

namespace {

constexpr std::string_view kUnicodeArrow = "→";

std::string checked_component(std::string_view raw, const char* role) {
  std::string s = text::normalize(raw);
  if (s.empty()) throw ContractError(std::string("triple ") + role + " is empty");
  for (std::string_view bad : std::initializer_list<std::string_view>{"--", "->", kUnicodeArrow, ",", "\n"}) {
    if (s.find(bad) != std::string::npos) {
      throw ContractError(std::string("triple ") + role + " \"" + s + "\" contains reserved \"" +
                          std::string(bad) + "\"");
    }
  }
  return s;
}

Triple parse_edge(std::string_view edge, std::size_t line_no, std::string_view line) {
  auto error = [&](const std::string& why) -> ParseError {
    return ParseError(line_no, std::string(line),
                      "kg line " + std::to_string(line_no) + ": " + why + ": \"" +
                          std::string(line) + "\"");
  };
  std::string_view e = text::trim(edge);
  if (e.size() >= 2 && e.front() == '(' && e.back() == ')') e = text::trim(e.substr(1, e.size() - 2));

  std::size_t arrow = std::string_view::npos;
  std::size_t arrow_len = 0;
  // The relation's leading "--" must not be mistaken for the arrow, so search
  // after it.
  const std::size_t sep = e.find("--");
  if (sep == std::string_view::npos) {
    const bool has_arrow =
        e.find("->") != std::string_view::npos || e.find(kUnicodeArrow) != std::string_view::npos;
    throw error(has_arrow ? "missing \"--\" before relation" : "no arrow");
  }
  const std::size_t rel_begin = sep + 2;
  const std::size_t ascii = e.find("->", rel_begin);
  const std::size_t uni = e.find(kUnicodeArrow, rel_begin);
  if (ascii != std::string_view::npos && (uni == std::string_view::npos || ascii < uni)) {
    arrow = ascii;
    arrow_len = 2;
  } else if (uni != std::string_view::npos) {
    arrow = uni;
    arrow_len = kUnicodeArrow.size();
  } else {
    throw error("no arrow");
  }

  const std::string_view subject = e.substr(0, sep);
  const std::string_view relation = e.substr(rel_begin, arrow - rel_begin);
  const std::string_view object = e.substr(arrow + arrow_len);
  if (text::trim(subject).empty()) throw error("empty subject");
  if (text::trim(relation).empty()) throw error("empty relation");
  if (text::trim(object).empty()) throw error("empty object");
  try {
    return Triple(subject, relation, object);
  } catch (const ContractError& ex) {
    throw error(ex.what());
  }
}

}  // namespace

std::string normalize_entity(std::string_view s) { return text::normalize(s); }

Triple::Triple(std::string_view subject, std::string_view relation, std::string_view object)
    : subject_(checked_component(subject, "subject")),
      relation_(checked_component(relation, "relation")),
      object_(checked_component(object, "object")) {}

std::string to_string(const Triple& t) {
  return t.subject() + " --" + t.relation() + "-> " + t.object();
}

KnowledgeGraph update_internal(const KnowledgeGraph& kg, const GameSpec& spec,
                               const WorldState& state, const ObservationBundle& /*obs*/) {
  if (kg.kind() != KgKind::kInternal) {
    throw ContractError("update_internal requires an internal knowledge graph");
  }
  std::set<Triple> edges = kg.edges();
  const Room& room = spec.room(state.current_room);

  // 1
  std::erase_if(edges, [](const Triple& t) { return t.subject() == kYou && t.relation() == "in"; });
  edges.emplace(kYou, "in", room.name);
  // 2
  for (const auto& [dir, dest] : room.exits) {
    edges.emplace(room.name, to_string(dir), spec.room(dest).name);
  }
  // 3
  for (const auto& o : spec.objects) {
    auto it = state.object_locations.find(o.id);
    if (it != state.object_locations.end() && it->second == room.id) {
      edges.emplace(o.name, "in", room.name);
    }
  }
  // 4
  for (const auto& id : state.inventory) {
    const std::string name = normalize_entity(spec.object(id).name);
    std::erase_if(edges, [&](const Triple& t) { return t.subject() == name && t.relation() == "in"; });
    edges.emplace(kYou, "have", name);
  }
  // 5
  const Goal& goal = spec.goal;
  auto alive = state.character_alive.find(goal.target);
  if (alive != state.character_alive.end() && !alive->second) {
    edges.emplace(kYou, goal.verb, spec.character(goal.target).name);
  }
  return KnowledgeGraph(KgKind::kInternal, std::move(edges));
}

KnowledgeGraph parse_kg_text(std::string_view input) {
  std::set<Triple> edges;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= input.size()) {
    std::size_t end = input.find('\n', pos);
    if (end == std::string_view::npos) end = input.size();
    std::string_view line = input.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = end + 1;

    const std::string_view trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    std::size_t start = 0;
    while (start < trimmed.size()) {
      std::size_t comma = trimmed.find(',', start);
      if (comma == std::string_view::npos) comma = trimmed.size();
      const std::string_view piece = trimmed.substr(start, comma - start);
      // A trailing comma is tolerated; an empty edge between commas is not.
      if (!text::trim(piece).empty()) {
        edges.insert(parse_edge(piece, line_no, line));
      } else if (comma != trimmed.size()) {
        throw ParseError(line_no, std::string(line),
                         "kg line " + std::to_string(line_no) + ": empty edge: \"" +
                             std::string(line) + "\"");
      }
      start = comma + 1;
    }
  }
  return KnowledgeGraph(KgKind::kTarget, std::move(edges));
}

KnowledgeGraph filter_you_edges(const KnowledgeGraph& kg) {
  std::set<Triple> kept;
  for (const Triple& t : kg.edges()) {
    if (t.subject() == kYou) kept.insert(t);
  }
  return KnowledgeGraph(KgKind::kTarget, std::move(kept));
}

std::set<Triple> overlap(const KnowledgeGraph& internal, const KnowledgeGraph& target) {
  std::set<Triple> out;
  std::set_intersection(internal.edges().begin(), internal.edges().end(), target.edges().begin(),
                        target.edges().end(), std::inserter(out, out.end()));
  return out;
}

std::string serialize_kg(const KnowledgeGraph& kg) {
  std::vector<std::string> lines;
  lines.reserve(kg.size());
  for (const Triple& t : kg.edges()) lines.push_back(to_string(t));
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace dshape
