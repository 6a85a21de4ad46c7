#include "dshape/dialogue.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "dshape/error.hpp"
#include "text.hpp"

namespace dshape {

namespace {

using Json = nlohmann::ordered_json;

std::string lower(std::string_view s) { return text::normalize(s); }

std::string with_article(const std::string& noun) {
  const char c = noun.empty() ? 'x' : noun[0];
  const bool vowel = c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u';
  return std::string(vowel ? "An " : "A ") + noun;
}

const GameObject* object_by_name(const GameSpec& spec, std::string_view name) {
  const std::string wanted = lower(name);
  for (const auto& o : spec.objects) {
    if (lower(o.name) == wanted) return &o;
  }
  return nullptr;
}

const Character* character_by_name(const GameSpec& spec, std::string_view name) {
  const std::string wanted = lower(name);
  for (const auto& c : spec.characters) {
    if (lower(c.name) == wanted) return &c;
  }
  return nullptr;
}

const Room* room_by_name(const GameSpec& spec, std::string_view name) {
  std::string wanted = lower(name);
  if (wanted.rfind("the ", 0) == 0) wanted = wanted.substr(4);
  for (const auto& r : spec.rooms) {
    if (lower(r.name) == wanted) return &r;
  }
  return nullptr;
}

Answer yes() { return {Polarity::kYes, std::nullopt, "Yes."}; }
Answer no(std::string text = "No.") { return {Polarity::kNo, std::nullopt, std::move(text)}; }

Answer not_in_game(std::string_view what) {
  return no("No. There is no " + lower(what) + " in this game.");
}

// Returns the reason the goal phrase does not match the spec, if any.
std::optional<Answer> check_goal(const GameSpec& spec, const GoalPhrase& g) {
  const Character* target = character_by_name(spec, g.target);
  if (target == nullptr) return not_in_game(g.target);
  if (lower(g.verb) != spec.goal.verb || target->id != spec.goal.target) {
    return no("No. That is not the goal of this game.");
  }
  return std::nullopt;
}

// Split "Yes. No. No." / "A sword." into sentences, keeping terminators.
std::vector<std::string> sentences(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < s.size(); ++i) {
    cur.push_back(s[i]);
    const bool terminator = s[i] == '.' || s[i] == '?' || s[i] == '!';
    const bool boundary = i + 1 == s.size() || text::is_space(s[i + 1]);
    if (terminator && boundary) {
      auto t = text::trim(cur);
      if (!t.empty()) out.emplace_back(t);
      cur.clear();
    }
  }
  auto t = text::trim(cur);
  if (!t.empty()) out.emplace_back(t);
  return out;
}

std::string strip_terminal_punct(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?')) s.remove_suffix(1);
  return std::string(text::trim(s));
}

std::string strip_article(std::string s) {
  for (std::string_view art : {"a ", "an ", "the "}) {
    if (s.size() > art.size() && text::to_lower(s.substr(0, art.size())) == art) {
      return s.substr(art.size());
    }
  }
  return s;
}

const std::set<std::string>& generic_nouns() {
  static const std::set<std::string> nouns = {
      "way",       "ways",    "object",  "objects",    "weapon",   "weapons",  "item",
      "items",     "thing",   "things",  "information","knowledge","room",     "rooms",
      "place",     "game",    "goal",    "origin",     "history",  "intention","intentions",
      "weakness",  "weaknesses", "npc",  "agent",      "other",    "only",     "same",
      "best",      "first",   "next",    "last",       "exit",     "exits",    "door",
      "prerequisite", "hint", "hints",   "answer",     "question", "player",   "location",
      "one",       "map",     "layout",  "path",       "key",      "reason",   "use"};
  return nouns;
}

}  // namespace

GoalPhrase goal_phrase(const GameSpec& spec) {
  return {spec.goal.verb, lower(spec.character(spec.goal.target).name)};
}

std::string_view to_string(QuestionKind kind) {
  switch (kind) {
    case QuestionKind::kNeedsObject: return "needs_object";
    case QuestionKind::kWhichObject: return "which_object";
    case QuestionKind::kWhereIs: return "where_is";
    case QuestionKind::kLayout: return "layout";
    case QuestionKind::kYesNoFree: return "yes_no_free";
  }
  return "yes_no_free";
}

std::string_view to_string(Polarity p) {
  switch (p) {
    case Polarity::kYes: return "yes";
    case Polarity::kNo: return "no";
    case Polarity::kNotApplicable: return "n/a";
  }
  return "n/a";
}

Question Question::needs_object(const GoalPhrase& goal) {
  return {QuestionKind::kNeedsObject, goal, {},
          "Do I need an object to " + goal.verb + " the " + goal.target + "?"};
}

Question Question::which_object(const GoalPhrase& goal) {
  return {QuestionKind::kWhichObject, goal, {},
          "What object I should get to " + goal.verb + " the " + goal.target + "?"};
}

Question Question::where_is(std::string entity) {
  std::string t = "Where can I find the " + entity + "?";
  return {QuestionKind::kWhereIs, {}, std::move(entity), std::move(t)};
}

Question Question::layout(std::string room) {
  std::string t = "Which rooms are next to the " + room + "?";
  return {QuestionKind::kLayout, {}, std::move(room), std::move(t)};
}

Question Question::free(std::string t) {
  if (text::trim(t).empty()) throw ContractError("question text is empty");
  return {QuestionKind::kYesNoFree, {}, {}, std::move(t)};
}

std::vector<std::string> ungrounded_entities(const GameSpec& spec, std::string_view question) {
  static const std::set<std::string> determiners = {"the", "a", "an", "any", "some", "this", "that"};
  std::vector<std::vector<std::string>> known;
  auto add_known = [&](const std::string& name) { known.push_back(text::words(name)); };
  for (const auto& r : spec.rooms) add_known(r.name);
  for (const auto& o : spec.objects) add_known(o.name);
  for (const auto& c : spec.characters) add_known(c.name);

  const auto w = text::words(question);
  std::vector<std::string> missing;
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (!determiners.count(w[i])) continue;
    bool grounded = false;
    for (const auto& name : known) {
      if (!name.empty() && i + name.size() < w.size() &&
          std::equal(name.begin(), name.end(), w.begin() + static_cast<std::ptrdiff_t>(i + 1))) {
        grounded = true;
        break;
      }
    }
    const std::string& head = w[i + 1];
    if (grounded || generic_nouns().count(head) || determiners.count(head)) continue;
    if (std::find(missing.begin(), missing.end(), head) == missing.end()) missing.push_back(head);
  }
  return missing;
}

std::string render_layout(const GameSpec& spec, std::string_view room_id) {
  const Room& room = spec.room(room_id);
  std::vector<std::string> entries;
  for (const auto& [dir, dest] : room.exits) {
    const std::string here = lower(room.name);
    const std::string there = lower(spec.room(dest).name);
    if (dir == Direction::kEast || dir == Direction::kNorth) {
      entries.push_back(there + "-" + std::string(to_string(dir)) + "-" + here);
    } else {
      entries.push_back(here + "-" + std::string(to_string(opposite(dir))) + "-" + there);
    }
  }
  return text::join(entries, ", ");
}

Answer npc_answer(const GameSpec& spec, const Question& q) {
  switch (q.kind) {
    case QuestionKind::kNeedsObject: {
      if (auto mismatch = check_goal(spec, q.goal)) return *mismatch;
      return spec.goal.required_object ? yes() : no();
    }
    case QuestionKind::kWhichObject: {
      if (auto mismatch = check_goal(spec, q.goal)) return *mismatch;
      if (!spec.goal.required_object) return no("No object is needed.");
      const std::string name = lower(spec.object(*spec.goal.required_object).name);
      return {Polarity::kNotApplicable, name, with_article(name) + "."};
    }
    case QuestionKind::kWhereIs: {
      std::string room_id;
      if (const GameObject* o = object_by_name(spec, q.subject)) {
        room_id = o->room;
      } else if (const Character* c = character_by_name(spec, q.subject)) {
        room_id = c->room;
      } else if (const Room* r = room_by_name(spec, q.subject)) {
        return {Polarity::kNotApplicable, r->name, "The " + r->name + " is a room in this game."};
      } else {
        return not_in_game(q.subject);
      }
      const std::string& name = spec.room(room_id).name;
      return {Polarity::kNotApplicable, name, "The " + name + "."};
    }
    case QuestionKind::kLayout: {
      const Room* r = room_by_name(spec, q.subject);
      if (r == nullptr) return not_in_game(q.subject);
      const std::string layout = render_layout(spec, r->id);
      return {Polarity::kNotApplicable, std::nullopt,
              layout.empty() ? "The " + lower(r->name) + " has no exits." : layout + "."};
    }
    case QuestionKind::kYesNoFree: {
      const auto missing = ungrounded_entities(spec, q.text);
      if (!missing.empty()) return not_in_game(missing.front());
      return no();
    }
  }
  return no();
}

std::vector<Answer> OracleNpc::answer(const std::vector<Question>& questions) {
  std::vector<Answer> out;
  out.reserve(questions.size());
  for (const auto& q : questions) out.push_back(npc_answer(spec_, q));
  return out;
}

DialogueFacts dialogue_facts(const DialogueTranscript& transcript) {
  DialogueFacts f;
  for (const auto& round : transcript.rounds) {
    const std::size_t n = std::min(round.questions.size(), round.answers.size());
    for (std::size_t i = 0; i < n; ++i) {
      const Question& q = round.questions[i];
      const Answer& a = round.answers[i];
      switch (q.kind) {
        case QuestionKind::kNeedsObject:
          if (!f.goal) f.goal = q.goal;
          if (a.polarity == Polarity::kYes) f.needs_object = true;
          if (a.polarity == Polarity::kNo) f.needs_object = false;
          break;
        case QuestionKind::kWhichObject:
          if (!f.goal) f.goal = q.goal;
          f.asked_which_object = true;
          if (a.payload) {
            f.object = lower(*a.payload);
            f.needs_object = true;
          }
          break;
        case QuestionKind::kWhereIs:
          if (f.object && lower(q.subject) == *f.object) {
            f.asked_where_is = true;
            if (a.payload) f.location = *a.payload;
          }
          break;
        case QuestionKind::kLayout:
        case QuestionKind::kYesNoFree:
          break;
      }
    }
  }
  return f;
}

bool is_sufficient(const DialogueTranscript& transcript) {
  const DialogueFacts f = dialogue_facts(transcript);
  if (f.needs_object == false) return true;
  return f.object.has_value() && f.location.has_value();
}

std::vector<Question> scripted_next_questions(const DialogueTranscript& transcript,
                                              const GoalPhrase& goal) {
  const DialogueFacts f = dialogue_facts(transcript);
  if (!f.needs_object.has_value()) {
    // Asked already and got a non-polar answer: nothing sensible to follow.
    for (const auto& round : transcript.rounds) {
      for (const auto& q : round.questions) {
        if (q.kind == QuestionKind::kNeedsObject) return {};
      }
    }
    return {Question::needs_object(goal)};
  }
  if (!*f.needs_object) return {};
  if (!f.object) {
    if (f.asked_which_object) return {};
    return {Question::which_object(goal)};
  }
  if (!f.location) {
    if (f.asked_where_is) return {};
    return {Question::where_is(*f.object)};
  }
  return {};
}

DialogueTranscript run_dialogue(Questioner& questioner, Npc& npc, int max_rounds) {
  if (max_rounds < 1) throw ContractError("max_rounds must be at least 1");
  DialogueTranscript t;
  while (true) {
    if (is_sufficient(t)) {
      t.outcome = DialogueOutcome::kSufficient;
      break;
    }
    if (t.rounds_used >= max_rounds) {
      t.outcome = DialogueOutcome::kExhausted;
      break;
    }
    DialogueRound round;
    try {
      round.questions = questioner.next(t);
    } catch (const std::exception& e) {
      throw DialogueError(std::string("questioner failed: ") + e.what(), t);
    }
    if (round.questions.empty()) {
      t.outcome = DialogueOutcome::kExhausted;
      break;
    }
    try {
      round.answers = npc.answer(round.questions);
    } catch (const std::exception& e) {
      throw DialogueError(std::string("npc failed: ") + e.what(), t);
    }
    if (round.answers.size() != round.questions.size()) {
      throw DialogueError("npc returned " + std::to_string(round.answers.size()) + " answers for " +
                              std::to_string(round.questions.size()) + " questions",
                          t);
    }
    t.rounds.push_back(std::move(round));
    ++t.rounds_used;
  }
  return t;
}

Question classify_question(std::string_view raw, const GoalPhrase& goal) {
  std::string q = std::string(text::trim(raw));
  const std::string norm = lower(q);
  const std::string tail = "to " + goal.verb + " the " + goal.target;
  const bool about_goal = norm.find(tail) != std::string::npos;
  if (about_goal && (norm.rfind("do i need an object", 0) == 0 ||
                     norm.rfind("do i need any object", 0) == 0 ||
                     norm.rfind("do i need a weapon", 0) == 0)) {
    Question out = Question::needs_object(goal);
    out.text = q;
    return out;
  }
  if (about_goal && (norm.rfind("what object", 0) == 0 || norm.rfind("which object", 0) == 0)) {
    Question out = Question::which_object(goal);
    out.text = q;
    return out;
  }
  for (std::string_view prefix : {"where can i find ", "where is ", "where do i find "}) {
    if (norm.rfind(prefix, 0) == 0) {
      std::string entity = strip_article(strip_terminal_punct(norm.substr(prefix.size())));
      if (!entity.empty()) {
        Question out = Question::where_is(entity);
        out.text = q;
        return out;
      }
    }
  }
  return Question::free(q);
}

Answer interpret_answer(const Question& question, std::string_view raw) {
  const std::string reply = std::string(text::trim(raw));
  const std::string norm = lower(reply);
  Answer a;
  a.text = reply;
  if (norm.rfind("yes", 0) == 0) {
    a.polarity = Polarity::kYes;
    return a;
  }
  if (norm.rfind("no", 0) == 0 && (norm.size() == 2 || !std::isalpha(static_cast<unsigned char>(norm[2])))) {
    a.polarity = Polarity::kNo;
    return a;
  }
  if (question.kind == QuestionKind::kWhichObject || question.kind == QuestionKind::kWhereIs) {
    std::string payload = strip_article(strip_terminal_punct(reply));
    if (!payload.empty()) a.payload = payload;
  }
  return a;
}

LlmQuestioner::LlmQuestioner(GoalPhrase goal, ChatBackend& chat)
    : goal_(std::move(goal)), chat_(chat) {
  session_.push_back({ChatRole::kSystem, render_agent_prompt(goal_)});
}

std::vector<Question> LlmQuestioner::next(const DialogueTranscript& transcript) {
  if (transcript.rounds.empty()) {
    session_.push_back({ChatRole::kUser, "Ask your first set of questions."});
  } else {
    std::vector<std::string> said;
    for (const auto& a : transcript.rounds.back().answers) said.push_back(a.text);
    session_.push_back({ChatRole::kUser, "NPC: " + text::join(said, " ")});
  }
  const std::string reply = chat_.complete(session_);
  session_.push_back({ChatRole::kAssistant, reply});

  if (lower(reply).find("dialogue ends") != std::string::npos) return {};
  std::vector<Question> out;
  std::string cur;
  for (char c : reply) {
    cur.push_back(c);
    if (c == '?') {
      std::string_view t = text::trim(cur);
      // Drop a leading speaker tag such as "Agent:".
      if (auto colon = t.find(':'); colon != std::string_view::npos && colon < 12) {
        t = text::trim(t.substr(colon + 1));
      }
      if (!t.empty()) out.push_back(classify_question(t, goal_));
      cur.clear();
    }
  }
  return out;
}

LlmNpc::LlmNpc(const GameSpec& spec, ChatBackend& chat) : chat_(chat) {
  session_.push_back({ChatRole::kSystem, render_npc_prompt(spec)});
}

std::vector<Answer> LlmNpc::answer(const std::vector<Question>& questions) {
  std::vector<std::string> texts;
  for (const auto& q : questions) texts.push_back(q.text);
  session_.push_back({ChatRole::kUser, text::join(texts, " ")});
  const std::string reply = chat_.complete(session_);
  session_.push_back({ChatRole::kAssistant, reply});

  auto parts = sentences(reply);
  if (parts.size() != questions.size() && questions.size() > 1) {
    // Could not align the combined reply; ask one question at a time.
    parts.clear();
    for (const auto& q : questions) {
      session_.push_back({ChatRole::kUser, q.text});
      std::string single = chat_.complete(session_);
      session_.push_back({ChatRole::kAssistant, single});
      parts.push_back(std::move(single));
    }
  } else if (questions.size() == 1) {
    parts = {reply};
  }
  std::vector<Answer> out;
  for (std::size_t i = 0; i < questions.size(); ++i) out.push_back(interpret_answer(questions[i], parts[i]));
  return out;
}

std::string render_npc_prompt(const GameSpec& spec) {
  std::string out =
      "You are an NPC in a text-adventure game. You and the agent are both in the game. For each "
      "step, waits for the agent to ask questions, then you should provide a correct answer based "
      "on the information about the game given as follow:\n";

  std::vector<std::string> layout;
  for (const auto& r : spec.rooms) {
    for (const auto& [dir, dest] : r.exits) {
      if (dir == Direction::kEast || dir == Direction::kNorth) {
        layout.push_back(lower(spec.room(dest).name) + "-" + std::string(to_string(dir)) + "-" +
                         lower(r.name));
      }
    }
  }
  out += "Layout: " + text::join(layout, ", ") +
         " (A-east-B means A is to the east of B, and B is to the west of A)\n";

  const Goal& g = spec.goal;
  const Character& target = spec.character(g.target);
  const std::string who = lower(target.name);
  out += "Goal and prerequisite: " + with_article(who) + " is in the " +
         lower(spec.room(target.room).name) + ". ";
  if (g.required_object) {
    out += "The only way to " + g.verb + " the " + who + " is to use " +
           text::to_lower(with_article(lower(spec.object(*g.required_object).name))) +
           " and there is no other way.\n";
  } else {
    out += "You can " + g.verb + " the " + who + " without using any object.\n";
  }

  std::vector<std::string> info;
  for (const auto& r : spec.rooms) {
    std::vector<std::string> here;
    for (const auto& o : spec.objects) {
      if (o.room == r.id) here.push_back(lower(o.name));
    }
    if (here.empty()) {
      info.push_back(lower(r.name) + " has no objects.");
    } else {
      info.push_back(text::join(here, ", ") + " is in " + lower(r.name) + ".");
    }
  }
  out += "Object information: " + text::join(info, " ");
  return out;
}

std::string render_agent_prompt(const GoalPhrase& goal) {
  const std::string g = goal.verb + " the " + goal.target;
  return "You are an agent in a text-adventure game. You and the NPC are both in the game. Your "
         "goal is to " + g + ". For each step, you should ask questions to the NPC in order to get "
         "the information on how to " + g + ".\n"
         "Ask a new set of questions based on the current observation and answers given to the "
         "previous set of questions according to the following rule: 1. ask similar and follow-up "
         "questions to previous questions that have a \"yes\" answer. 2. Avoid asking similar and "
         "follow-up questions to previous questions that have a \"no\" answer.";
}

std::string render_kg_prompt() {
  return "Output a textual knowledge graph that contains the game information required to reach "
         "the goal. Output it in the format of edges (entity1 --direction or verbs→ entity2). For "
         "example, you--have→rugs, town center --west→ the bar";
}

KnowledgeGraph extract_target_kg_structured(const DialogueTranscript& transcript) {
  if (transcript.outcome != DialogueOutcome::kSufficient || !is_sufficient(transcript)) {
    throw ExtractionError("transcript is not sufficient; cannot build a target graph");
  }
  const DialogueFacts f = dialogue_facts(transcript);
  if (!f.goal) throw ExtractionError("transcript never states the goal");
  std::set<Triple> edges;
  if (f.object) {
    edges.emplace(kYou, "have", *f.object);
    if (f.location && *f.location != kHeldByYou) edges.emplace(*f.object, "in", *f.location);
  }
  edges.emplace(kYou, f.goal->verb, f.goal->target);
  return filter_you_edges(KnowledgeGraph(KgKind::kTarget, std::move(edges)));
}

KnowledgeGraph extract_target_kg_llm(ChatSession& agent_session, ChatBackend& chat) {
  agent_session.push_back({ChatRole::kUser, render_kg_prompt()});
  const std::string reply = chat.complete(agent_session);
  agent_session.push_back({ChatRole::kAssistant, reply});
  try {
    return filter_you_edges(parse_kg_text(reply));
  } catch (const ParseError& e) {
    throw ExtractionError(std::string("unparseable knowledge graph reply: ") + e.what(), reply);
  }
}

namespace {

Json question_to_json(const Question& q) {
  Json j = {{"kind", std::string(to_string(q.kind))}};
  switch (q.kind) {
    case QuestionKind::kNeedsObject:
    case QuestionKind::kWhichObject:
      j["verb"] = q.goal.verb;
      j["target"] = q.goal.target;
      break;
    case QuestionKind::kWhereIs:
    case QuestionKind::kLayout:
      j["subject"] = q.subject;
      break;
    case QuestionKind::kYesNoFree:
      break;
  }
  j["text"] = q.text;
  return j;
}

Question question_from_json(const Json& j) {
  Question q;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "needs_object") {
    q.kind = QuestionKind::kNeedsObject;
  } else if (kind == "which_object") {
    q.kind = QuestionKind::kWhichObject;
  } else if (kind == "where_is") {
    q.kind = QuestionKind::kWhereIs;
  } else if (kind == "layout") {
    q.kind = QuestionKind::kLayout;
  } else if (kind == "yes_no_free") {
    q.kind = QuestionKind::kYesNoFree;
  } else {
    throw std::runtime_error("unknown question kind \"" + kind + "\"");
  }
  if (j.contains("verb")) q.goal.verb = j.at("verb").get<std::string>();
  if (j.contains("target")) q.goal.target = j.at("target").get<std::string>();
  if (j.contains("subject")) q.subject = j.at("subject").get<std::string>();
  q.text = j.at("text").get<std::string>();
  return q;
}

Json answer_to_json(const Answer& a) {
  Json j = {{"polarity", std::string(to_string(a.polarity))}};
  j["payload"] = a.payload ? Json(*a.payload) : Json(nullptr);
  j["text"] = a.text;
  return j;
}

Answer answer_from_json(const Json& j) {
  Answer a;
  const std::string p = j.at("polarity").get<std::string>();
  if (p == "yes") {
    a.polarity = Polarity::kYes;
  } else if (p == "no") {
    a.polarity = Polarity::kNo;
  } else if (p == "n/a") {
    a.polarity = Polarity::kNotApplicable;
  } else {
    throw std::runtime_error("unknown polarity \"" + p + "\"");
  }
  if (!j.at("payload").is_null()) a.payload = j.at("payload").get<std::string>();
  a.text = j.at("text").get<std::string>();
  return a;
}

}  // namespace

void write_transcript(std::ostream& out, const DialogueTranscript& t) {
  for (std::size_t i = 0; i < t.rounds.size(); ++i) {
    Json line = {{"round", i + 1}, {"questions", Json::array()}, {"answers", Json::array()}};
    for (const auto& q : t.rounds[i].questions) line["questions"].push_back(question_to_json(q));
    for (const auto& a : t.rounds[i].answers) line["answers"].push_back(answer_to_json(a));
    out << line.dump() << '\n';
  }
  Json trailer = {
      {"outcome", t.outcome == DialogueOutcome::kSufficient ? "sufficient" : "exhausted"},
      {"rounds_used", t.rounds_used}};
  out << trailer.dump() << '\n';
}

DialogueTranscript read_transcript(std::istream& in) {
  DialogueTranscript t;
  std::string line;
  std::size_t line_no = 0;
  bool saw_trailer = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    if (saw_trailer) throw std::runtime_error("transcript: data after trailer line");
    try {
      const Json j = Json::parse(line);
      if (j.contains("outcome")) {
        const std::string o = j.at("outcome").get<std::string>();
        if (o != "sufficient" && o != "exhausted") throw std::runtime_error("unknown outcome \"" + o + "\"");
        t.outcome = o == "sufficient" ? DialogueOutcome::kSufficient : DialogueOutcome::kExhausted;
        t.rounds_used = j.at("rounds_used").get<int>();
        saw_trailer = true;
        continue;
      }
      if (j.at("round").get<std::size_t>() != t.rounds.size() + 1) {
        throw std::runtime_error("rounds out of order");
      }
      DialogueRound r;
      for (const auto& q : j.at("questions")) r.questions.push_back(question_from_json(q));
      for (const auto& a : j.at("answers")) r.answers.push_back(answer_from_json(a));
      if (r.questions.size() != r.answers.size()) {
        throw std::runtime_error("question/answer count mismatch");
      }
      t.rounds.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error("transcript line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!saw_trailer) throw std::runtime_error("transcript: missing trailer line");
  return t;
}

}  // namespace dshape
