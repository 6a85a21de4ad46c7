#include <gtest/gtest.h>

#include <random>

#include "dshape/error.hpp"
#include "dshape/kg.hpp"
#include "fixtures.hpp"

using namespace dshape;
using dshape::testing::game1_mini;

namespace {

KnowledgeGraph target(std::initializer_list<Triple> edges) { return KnowledgeGraph(KgKind::kTarget, edges); }

KnowledgeGraph internal_after(const GameSpec& spec, const std::vector<Action>& actions) {
  Reset r = initial_state(spec);
  KnowledgeGraph kg = update_internal(KnowledgeGraph(KgKind::kInternal), spec, r.state, r.observation);
  WorldState s = r.state;
  for (const Action& a : actions) {
    StepResult sr = step(spec, s, a, kDefaultStepCap);
    kg = update_internal(kg, spec, sr.state, sr.observation);
    s = sr.state;
  }
  return kg;
}

std::string random_component(std::mt19937_64& rng) {
  static const std::string alphabet = "abcdefghijklmnopqrstuvwxyz -_'.";
  std::uniform_int_distribution<int> len(1, 12);
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::string s;
  while (normalize_entity(s).empty()) {
    s.clear();
    const int n = len(rng);
    for (int i = 0; i < n; ++i) s += alphabet[pick(rng)];
    // keep clear of the edge syntax
    while (s.find("--") != std::string::npos) s.replace(s.find("--"), 2, "-x");
    if (!s.empty() && s.back() == '-') s.back() = 'y';
    if (!s.empty() && s.front() == '#') s.front() = 'z';
  }
  return s;
}

}  // namespace

TEST(Triple, NormalizesComponents) {
  const Triple t("  You ", "HAVE", "Rusty   Sword");
  EXPECT_EQ(t.subject(), "you");
  EXPECT_EQ(t.relation(), "have");
  EXPECT_EQ(t.object(), "rusty sword");
  EXPECT_EQ(to_string(t), "you --have-> rusty sword");
}

TEST(Triple, RejectsEmptyAndReserved) {
  EXPECT_THROW(Triple("", "have", "x"), ContractError);
  EXPECT_THROW(Triple("you", "   ", "x"), ContractError);
  EXPECT_THROW(Triple("a--b", "r", "x"), ContractError);
  EXPECT_THROW(Triple("a", "r", "x,y"), ContractError);
}

TEST(UpdateInternal, InitialCourtyard) {
  const KnowledgeGraph kg = internal_after(game1_mini(), {});
  const std::set<Triple> expected{Triple("you", "in", "courtyard"), Triple("courtyard", "east", "artillery room"),
                                  Triple("courtyard", "north", "dungeon")};
  EXPECT_EQ(kg.edges(), expected);
  EXPECT_EQ(kg.kind(), KgKind::kInternal);
}

TEST(UpdateInternal, GetSwordMovesEdge) {
  const GameSpec& spec = game1_mini();
  const KnowledgeGraph before = internal_after(spec, {Action::go(Direction::kEast)});
  EXPECT_TRUE(before.contains(Triple("sword", "in", "artillery room")));
  const KnowledgeGraph kg = internal_after(spec, {Action::go(Direction::kEast), Action::get("sword")});
  EXPECT_TRUE(kg.contains(Triple("you", "have", "sword")));
  EXPECT_FALSE(kg.contains(Triple("sword", "in", "artillery room")));
}

TEST(UpdateInternal, GoalEdgeOnWin) {
  const KnowledgeGraph kg = internal_after(
      game1_mini(), {Action::go(Direction::kEast), Action::get("sword"), Action::go(Direction::kWest),
                     Action::go(Direction::kNorth), Action::kill_with("dragon", "sword")});
  EXPECT_TRUE(kg.contains(Triple("you", "kill", "dragon")));
  EXPECT_TRUE(kg.contains(Triple("you", "in", "dungeon")));
}

TEST(UpdateInternal, IdempotentAndSingleLocation) {
  const GameSpec& spec = game1_mini();
  Reset r = initial_state(spec);
  const KnowledgeGraph once = update_internal(KnowledgeGraph(KgKind::kInternal), spec, r.state, r.observation);
  EXPECT_EQ(update_internal(once, spec, r.state, r.observation), once);

  const KnowledgeGraph walked = internal_after(
      spec, {Action::go(Direction::kEast), Action::go(Direction::kWest), Action::go(Direction::kNorth)});
  int locations = 0;
  for (const Triple& t : walked.edges()) locations += (t.subject() == "you" && t.relation() == "in") ? 1 : 0;
  EXPECT_EQ(locations, 1);
  EXPECT_TRUE(walked.contains(Triple("you", "in", "dungeon")));
}

TEST(UpdateInternal, TargetKindRejected) {
  const GameSpec& spec = game1_mini();
  Reset r = initial_state(spec);
  EXPECT_THROW(update_internal(target({}), spec, r.state, r.observation), ContractError);
}

TEST(ParseKgText, MixedArrowExample) {
  const KnowledgeGraph kg = parse_kg_text("you--have→rugs, town center --west→ the bar");
  const std::set<Triple> expected{Triple("you", "have", "rugs"), Triple("town center", "west", "the bar")};
  EXPECT_EQ(kg.edges(), expected);
  EXPECT_EQ(kg.kind(), KgKind::kTarget);
}

TEST(ParseKgText, AsciiArrowsAndNewlines) {
  const KnowledgeGraph kg = parse_kg_text("you --have-> sword\nyou --kill-> dragon");
  EXPECT_EQ(kg.edges(), (std::set<Triple>{Triple("you", "have", "sword"), Triple("you", "kill", "dragon")}));
}

TEST(ParseKgText, CommentsDuplicatesAndParens) {
  const KnowledgeGraph kg = parse_kg_text("# header\n(you --have-> sword)\nyou --have-> Sword,\n\n");
  EXPECT_EQ(kg.size(), 1u);
}

TEST(ParseKgText, MissingArrowReportsLine) {
  try {
    parse_kg_text("dragon dungeon");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 1u);
    EXPECT_EQ(e.text(), "dragon dungeon");
  }
  try {
    parse_kg_text("you --have-> sword\n--kill-> dragon");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(FilterYouEdges, KeepsOnlyYou) {
  const KnowledgeGraph g = target({Triple("you", "have", "sword"), Triple("town center", "west", "the bar")});
  const KnowledgeGraph f = filter_you_edges(g);
  EXPECT_EQ(f.edges(), (std::set<Triple>{Triple("you", "have", "sword")}));
  EXPECT_EQ(filter_you_edges(f), f);
  EXPECT_EQ(g.size(), 2u);
  EXPECT_TRUE(filter_you_edges(target({Triple("a", "b", "c")})).empty());
}

TEST(Overlap, Examples) {
  const KnowledgeGraph internal(KgKind::kInternal, {Triple("you", "in", "dungeon"), Triple("you", "have", "sword")});
  const KnowledgeGraph t = target({Triple("you", "have", "sword"), Triple("you", "kill", "dragon")});
  EXPECT_EQ(overlap(internal, t), (std::set<Triple>{Triple("you", "have", "sword")}));
  EXPECT_EQ(overlap(t, t), t.edges());
  EXPECT_TRUE(overlap(internal, target({})).empty());
}

TEST(Overlap, MonotoneInInternalEdges) {
  std::mt19937_64 rng(3);
  const std::vector<Triple> pool{Triple("you", "have", "sword"), Triple("you", "kill", "dragon"),
                                 Triple("you", "in", "dungeon"), Triple("a", "b", "c"), Triple("x", "y", "z")};
  const KnowledgeGraph t = target({pool[0], pool[1], pool[3]});
  for (int trial = 0; trial < 200; ++trial) {
    std::set<Triple> edges;
    std::size_t prev = 0;
    for (int k = 0; k < 5; ++k) {
      edges.insert(pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]);
      const std::size_t now = overlap(KnowledgeGraph(KgKind::kInternal, edges), t).size();
      EXPECT_GE(now, prev);
      prev = now;
    }
  }
}

TEST(SerializeKg, Format) {
  EXPECT_EQ(serialize_kg(target({Triple("you", "have", "sword")})), "you --have-> sword\n");
  EXPECT_EQ(serialize_kg(target({})), "");
  EXPECT_EQ(serialize_kg(target({Triple("you", "kill", "dragon"), Triple("you", "have", "sword")})),
            "you --have-> sword\nyou --kill-> dragon\n");
  const KnowledgeGraph mixed = parse_kg_text("you--have→rugs, town center --west→ the bar");
  EXPECT_EQ(parse_kg_text(serialize_kg(mixed)), mixed);
}

TEST(SerializeKg, RandomRoundTrip) {
  std::mt19937_64 rng(20240601);
  for (int trial = 0; trial < 1000; ++trial) {
    std::set<Triple> edges;
    const int n = std::uniform_int_distribution<int>(0, 8)(rng);
    for (int i = 0; i < n; ++i) edges.emplace(random_component(rng), random_component(rng), random_component(rng));
    const KnowledgeGraph g(KgKind::kTarget, edges);
    ASSERT_EQ(parse_kg_text(serialize_kg(g)), g) << serialize_kg(g);
  }
}
