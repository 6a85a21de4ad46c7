#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dshape/chat.hpp"
#include "dshape/kg.hpp"
#include "dshape/world.hpp"

namespace dshape {

// What the agent is trying to do, in the words it would use ("kill", "dragon").
struct GoalPhrase {
  std::string verb;
  std::string target;

  friend bool operator==(const GoalPhrase&, const GoalPhrase&) = default;
};

GoalPhrase goal_phrase(const GameSpec& spec);

enum class QuestionKind { kNeedsObject, kWhichObject, kWhereIs, kLayout, kYesNoFree };

std::string_view to_string(QuestionKind kind);

struct Question {
  QuestionKind kind = QuestionKind::kYesNoFree;
  GoalPhrase goal;      // needs_object, which_object
  std::string subject;  // where_is: entity name; layout: room name
  std::string text;

  static Question needs_object(const GoalPhrase& goal);
  static Question which_object(const GoalPhrase& goal);
  static Question where_is(std::string entity);
  static Question layout(std::string room);
  static Question free(std::string text);

  friend bool operator==(const Question&, const Question&) = default;
};

enum class Polarity { kYes, kNo, kNotApplicable };

std::string_view to_string(Polarity p);

struct Answer {
  Polarity polarity = Polarity::kNotApplicable;
  std::optional<std::string> payload;
  std::string text;

  friend bool operator==(const Answer&, const Answer&) = default;
};

inline constexpr std::string_view kHeldByYou = "held by you";

struct DialogueRound {
  std::vector<Question> questions;
  std::vector<Answer> answers;

  friend bool operator==(const DialogueRound&, const DialogueRound&) = default;
};

enum class DialogueOutcome { kSufficient, kExhausted };

struct DialogueTranscript {
  std::vector<DialogueRound> rounds;
  DialogueOutcome outcome = DialogueOutcome::kExhausted;
  int rounds_used = 0;

  friend bool operator==(const DialogueTranscript&, const DialogueTranscript&) = default;
};

// Facts established so far, read off the structured questions and answers.
struct DialogueFacts {
  std::optional<GoalPhrase> goal;
  std::optional<bool> needs_object;
  std::optional<std::string> object;
  std::optional<std::string> location;
  bool asked_which_object = false;
  bool asked_where_is = false;
};

DialogueFacts dialogue_facts(const DialogueTranscript& transcript);

// The required object is named and located, or it is established that no
// object is needed.
bool is_sufficient(const DialogueTranscript& transcript);

// Ground-truth answerer over a game spec.
Answer npc_answer(const GameSpec& spec, const Question& question);

// Entity-looking noun phrases in free text that name nothing in the spec.
std::vector<std::string> ungrounded_entities(const GameSpec& spec, std::string_view text);

// needs-object, then which-object, then where-is; stops at the first
// non-informative answer and never follows up a "no".
std::vector<Question> scripted_next_questions(const DialogueTranscript& transcript,
                                              const GoalPhrase& goal);

class Questioner {
 public:
  virtual ~Questioner() = default;
  virtual std::vector<Question> next(const DialogueTranscript& transcript) = 0;
};

class Npc {
 public:
  virtual ~Npc() = default;
  virtual std::vector<Answer> answer(const std::vector<Question>& questions) = 0;
};

class ScriptedQuestioner final : public Questioner {
 public:
  explicit ScriptedQuestioner(GoalPhrase goal) : goal_(std::move(goal)) {}
  std::vector<Question> next(const DialogueTranscript& transcript) override {
    return scripted_next_questions(transcript, goal_);
  }

 private:
  GoalPhrase goal_;
};

class OracleNpc final : public Npc {
 public:
  explicit OracleNpc(const GameSpec& spec) : spec_(spec) {}
  std::vector<Answer> answer(const std::vector<Question>& questions) override;

 private:
  const GameSpec& spec_;
};

// Questioner driven by a chat model primed with the agent prompt. Replies are
// split on '?' and each question is mapped to a structured kind when it
// matches one of the known phrasings.
class LlmQuestioner final : public Questioner {
 public:
  LlmQuestioner(GoalPhrase goal, ChatBackend& chat);
  std::vector<Question> next(const DialogueTranscript& transcript) override;
  ChatSession& session() { return session_; }

 private:
  GoalPhrase goal_;
  ChatBackend& chat_;
  ChatSession session_;
};

// NPC played by a chat model primed with the NPC prompt.
class LlmNpc final : public Npc {
 public:
  LlmNpc(const GameSpec& spec, ChatBackend& chat);
  std::vector<Answer> answer(const std::vector<Question>& questions) override;
  const ChatSession& session() const { return session_; }

 private:
  ChatBackend& chat_;
  ChatSession session_;
};

Question classify_question(std::string_view text, const GoalPhrase& goal);
Answer interpret_answer(const Question& question, std::string_view text);

class DialogueError : public std::runtime_error {
 public:
  DialogueError(const std::string& what, DialogueTranscript partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const DialogueTranscript& partial() const { return partial_; }

 private:
  DialogueTranscript partial_;
};

inline constexpr int kDefaultMaxRounds = 10;

DialogueTranscript run_dialogue(Questioner& questioner, Npc& npc, int max_rounds);

std::string render_npc_prompt(const GameSpec& spec);
std::string render_agent_prompt(const GoalPhrase& goal);
std::string render_kg_prompt();

// "artillery room-east-courtyard" style layout entries touching one room.
std::string render_layout(const GameSpec& spec, std::string_view room_id);

class ExtractionError : public std::runtime_error {
 public:
  ExtractionError(const std::string& what, std::string raw_reply = {})
      : std::runtime_error(what), raw_reply_(std::move(raw_reply)) {}
  const std::string& raw_reply() const { return raw_reply_; }

 private:
  std::string raw_reply_;
};

// Target graph built from the transcript's facts, filtered to "you" edges.
// Throws ExtractionError unless the transcript is sufficient.
KnowledgeGraph extract_target_kg_structured(const DialogueTranscript& transcript);

// Asks the agent session for a textual graph, parses and filters it. A reply
// that does not parse raises ExtractionError carrying the raw reply.
KnowledgeGraph extract_target_kg_llm(ChatSession& agent_session, ChatBackend& chat);

void write_transcript(std::ostream& out, const DialogueTranscript& transcript);
DialogueTranscript read_transcript(std::istream& in);

}  // namespace dshape
