#pragma once

#include <compare>
#include <set>
#include <string>
#include <string_view>

#include "dshape/world.hpp"

namespace dshape {

// Lowercase, trim, collapse internal whitespace.
std::string normalize_entity(std::string_view s);

// A <subject, relation, object> edge. Components are normalized on
// construction and must be non-empty; construction throws ContractError
// otherwise, or when a component contains a token reserved by the textual
// edge format ("--", "->", the unicode arrow, ',' or a newline).
class Triple {
 public:
  Triple(std::string_view subject, std::string_view relation, std::string_view object);

  const std::string& subject() const { return subject_; }
  const std::string& relation() const { return relation_; }
  const std::string& object() const { return object_; }

  friend auto operator<=>(const Triple&, const Triple&) = default;
  friend bool operator==(const Triple&, const Triple&) = default;

 private:
  std::string subject_;
  std::string relation_;
  std::string object_;
};

std::string to_string(const Triple& t);  // "s --r-> o"

enum class KgKind { kInternal, kTarget };

// Immutable edge set. Updates return new graphs, so a target graph cannot
// change after it is built.
class KnowledgeGraph {
 public:
  explicit KnowledgeGraph(KgKind kind, std::set<Triple> edges = {})
      : kind_(kind), edges_(std::move(edges)) {}

  KgKind kind() const { return kind_; }
  const std::set<Triple>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  bool contains(const Triple& t) const { return edges_.count(t) != 0; }

  friend bool operator==(const KnowledgeGraph&, const KnowledgeGraph&) = default;

 private:
  KgKind kind_;
  std::set<Triple> edges_;
};

inline constexpr std::string_view kYou = "you";

// Applies the internal-KG rules for the agent's current situation:
//   1. (you, in, *) is replaced by (you, in, <current room>)
//   2. (<room>, <dir>, <neighbor>) for each exit of the current room
//   3. (<object>, in, <room>) for each object lying in the current room
//   4. (you, have, <o>) for each held object, dropping any (<o>, in, *)
//   5. (you, <goal verb>, <target>) once the goal target is dead
// Entities are display names. Throws ContractError for a target-kind graph.
KnowledgeGraph update_internal(const KnowledgeGraph& kg, const GameSpec& spec,
                               const WorldState& state, const ObservationBundle& obs);

// Parses "A --rel-> B" edges separated by commas or newlines. Either "->" or
// the unicode arrow closes the relation. Lines starting with '#' are comments.
KnowledgeGraph parse_kg_text(std::string_view text);

// Keeps only the edges whose subject is "you".
KnowledgeGraph filter_you_edges(const KnowledgeGraph& kg);

std::set<Triple> overlap(const KnowledgeGraph& internal, const KnowledgeGraph& target);

// One edge per line, sorted; parse_kg_text(serialize_kg(g)) == g for target graphs.
std::string serialize_kg(const KnowledgeGraph& kg);

}  // namespace dshape
