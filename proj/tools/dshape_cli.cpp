#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "dshape/chat.hpp"
#include "dshape/checkpoint.hpp"
#include "dshape/dialogue.hpp"
#include "dshape/error.hpp"
#include "dshape/harness.hpp"
#include "dshape/kg.hpp"
#include "dshape/learner.hpp"
#include "dshape/world.hpp"

using namespace dshape;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

KnowledgeGraph load_target(const std::string& path) {
  KnowledgeGraph parsed = parse_kg_text(slurp(path));
  return KnowledgeGraph(KgKind::kTarget, parsed.edges());
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

struct DialogueOpts {
  std::string game;
  std::string questioner = "scripted";
  std::string npc = "oracle";
  int max_rounds = kDefaultMaxRounds;
  std::string out;
  std::string emit_kg;
  std::string model = "gpt-3.5-turbo";
};

int run_dialogue_cmd(const DialogueOpts& o) {
  const GameSpec spec = load_game_spec_file(o.game);
  const GoalPhrase goal = goal_phrase(spec);

  std::unique_ptr<HttpChatClient> chat;
  if (o.questioner == "llm" || o.npc == "llm") chat = std::make_unique<HttpChatClient>(ChatConfig::from_env(o.model));

  std::unique_ptr<Questioner> questioner;
  LlmQuestioner* llm_questioner = nullptr;
  if (o.questioner == "llm") {
    auto q = std::make_unique<LlmQuestioner>(goal, *chat);
    llm_questioner = q.get();
    questioner = std::move(q);
  } else {
    questioner = std::make_unique<ScriptedQuestioner>(goal);
  }
  std::unique_ptr<Npc> npc;
  if (o.npc == "llm") {
    npc = std::make_unique<LlmNpc>(spec, *chat);
  } else {
    npc = std::make_unique<OracleNpc>(spec);
  }

  DialogueTranscript transcript;
  try {
    transcript = run_dialogue(*questioner, *npc, o.max_rounds);
  } catch (const DialogueError& e) {
    if (!o.out.empty()) {
      auto out = open_out(o.out);
      write_transcript(out, e.partial());
    }
    throw;
  }

  for (const auto& round : transcript.rounds) {
    for (std::size_t i = 0; i < round.questions.size(); ++i) {
      std::cout << "Agent: " << round.questions[i].text << "\n";
      std::cout << "NPC: " << round.answers[i].text << "\n";
    }
  }
  std::cout << "outcome: " << (transcript.outcome == DialogueOutcome::kSufficient ? "sufficient" : "exhausted") << " after " << transcript.rounds_used
            << " round(s)\n";

  if (!o.out.empty()) {
    auto out = open_out(o.out);
    write_transcript(out, transcript);
  }
  if (!o.emit_kg.empty()) {
    KnowledgeGraph kg = llm_questioner ? extract_target_kg_llm(llm_questioner->session(), *chat)
                                       : extract_target_kg_structured(transcript);
    auto out = open_out(o.emit_kg);
    out << serialize_kg(kg);
  }
  return transcript.outcome == DialogueOutcome::kSufficient ? 0 : 3;
}

struct TrainOpts {
  std::string game;
  std::string target_kg;
  std::string profile = "desk";
  std::optional<long> steps;
  std::optional<long> eval_every;
  std::optional<int> eval_episodes;
  std::optional<int> seeds;
  std::optional<double> shaping_bonus;
  std::optional<int> goal_reward;
  std::optional<std::uint64_t> seed;
  std::optional<double> lr;
  unsigned jobs = 0;
  std::string out;
  std::string checkpoint;
};

TrainConfig build_config(const TrainOpts& o) {
  std::optional<TrainConfig> cfg = profile_by_name(o.profile);
  if (!cfg) throw ContractError("unknown profile \"" + o.profile + "\" (expected full or desk)");
  if (o.steps) cfg->total_steps = *o.steps;
  if (o.eval_every) cfg->eval_every = *o.eval_every;
  if (o.eval_episodes) cfg->eval_episodes = *o.eval_episodes;
  if (o.seeds) cfg->n_seeds = *o.seeds;
  if (o.shaping_bonus) cfg->shaping_bonus = *o.shaping_bonus;
  if (o.goal_reward) cfg->goal_reward_override = *o.goal_reward;
  if (o.seed) cfg->seed = *o.seed;
  if (o.lr) cfg->a2c.learning_rate = *o.lr;
  cfg->validate();
  return *cfg;
}

int run_train_cmd(const TrainOpts& o) {
  const GameSpec spec = load_game_spec_file(o.game);
  const TrainConfig cfg = build_config(o);
  std::optional<KnowledgeGraph> target;
  if (!o.target_kg.empty()) target = load_target(o.target_kg);
  const Condition condition = target ? Condition::kShaped : Condition::kBaseline;

  std::vector<SeedRun> runs(static_cast<std::size_t>(cfg.n_seeds));
  std::optional<Checkpoint> last;
  for (int i = 0; i < cfg.n_seeds; ++i) {
    const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    TrainResult r = train(spec, cfg, target, seed);
    const int goal = cfg.goal_reward_override.value_or(spec.goal.reward);
    const auto first = steps_to_first_perfect(r.evals, goal);
    std::cerr << "seed " << seed << ": " << r.episodes.size() << " episodes, final eval "
              << (r.evals.empty() ? 0.0 : r.evals.back().mean_score) << ", first perfect eval at "
              << (first ? std::to_string(*first) : std::string("never")) << "\n";
    runs[static_cast<std::size_t>(i)].seed = seed;
    runs[static_cast<std::size_t>(i)].evals = std::move(r.evals);
    last = Checkpoint{std::move(r.params), cfg, seed};
  }

  std::vector<EvalRecord> rows =
      cfg.n_seeds == 1 ? runs.front().evals : pool_curves(runs, condition);
  if (o.out.empty()) {
    write_metrics_csv(std::cout, rows);
  } else {
    auto out = open_out(o.out);
    write_metrics_csv(out, rows);
  }
  if (!o.checkpoint.empty() && last) save_checkpoint(o.checkpoint, *last);
  return 0;
}

int run_compare_cmd(const TrainOpts& o) {
  const GameSpec spec = load_game_spec_file(o.game);
  const TrainConfig cfg = build_config(o);
  const KnowledgeGraph target = load_target(o.target_kg);
  const ComparisonReport report = compare(spec, cfg, target, o.jobs);
  write_report(o.out, report);

  auto fmt = [](const std::optional<long>& v) { return v ? std::to_string(*v) : std::string("inf"); };
  std::cout << "seed  baseline  shaped\n";
  for (std::size_t i = 0; i < report.baseline.size(); ++i) {
    std::cout << report.baseline[i].seed << "  " << fmt(report.baseline[i].steps_to_perfect) << "  "
              << fmt(report.shaped[i].steps_to_perfect) << "\n";
  }
  std::cout << "shaped <= baseline: " << report.win_pairs << "/" << report.baseline.size()
            << ", strictly faster: " << report.strict_win_pairs << "/" << report.baseline.size()
            << ", auc >= baseline: " << report.auc_win_pairs << "/" << report.baseline.size() << "\n";
  return 0;
}

int run_oracle_cmd(const std::string& game, int step_cap, double gamma) {
  const GameSpec spec = load_game_spec_file(game);
  const OracleResult r = value_iteration(spec, gamma, step_cap);
  std::cout << "optimal return: " << r.optimal_return << "\n";
  std::cout << "discounted value: " << r.discounted_value << "\n";
  std::cout << "states explored: " << r.states_explored << "\n";
  if (!r.path_length) {
    std::cout << "no winning path within " << step_cap << " steps\n";
    return 0;
  }
  std::cout << "path length: " << *r.path_length << "\n";
  for (std::size_t i = 0; i < r.path.size(); ++i) {
    std::cout << "  " << i + 1 << ". " << action_text(spec, r.path[i]) << "\n";
  }
  return 0;
}

int run_play_cmd(const std::string& game, int step_cap) {
  const GameSpec spec = load_game_spec_file(game);
  Reset reset = initial_state(spec);
  WorldState state = reset.state;
  int score = 0;
  std::cout << reset.observation.room_description << "\n";
  std::string line;
  while (!state.done) {
    std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    if (line == "quit" || line == "exit") break;
    if (line == "look") {
      std::cout << describe_room(spec, state) << "\n";
      continue;
    }
    if (line == "inventory" || line == "i") {
      std::cout << describe_inventory(spec, state) << "\n";
      continue;
    }
    if (line == "help") {
      for (const Action& a : valid_actions(spec, state)) std::cout << "  " << action_text(spec, a) << "\n";
      continue;
    }
    const std::optional<Action> action = parse_action(spec, line);
    if (!action) {
      std::cout << "I don't understand that. Type \"help\" for the valid actions.\n";
      continue;
    }
    try {
      StepResult r = step(spec, state, *action, step_cap);
      score += r.reward;
      std::cout << r.observation.last_action_feedback << "\n";
      if (r.state.current_room != state.current_room) std::cout << r.observation.room_description << "\n";
      state = std::move(r.state);
      if (r.won) std::cout << "You won! Score: " << score << "\n";
    } catch (const InvalidActionError& e) {
      std::cout << e.what() << "\n";
    }
  }
  if (state.done && state.steps_taken >= step_cap) std::cout << "Out of steps. Score: " << score << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dialogue-shaped reinforcement learning for text adventures"};
  app.require_subcommand(1);

  DialogueOpts dopts;
  auto* dialogue = app.add_subcommand("dialogue", "Run the agent/NPC dialogue and emit a target graph");
  dialogue->add_option("game", dopts.game, "Game spec JSON")->required()->check(CLI::ExistingFile);
  dialogue->add_option("--questioner", dopts.questioner)->check(CLI::IsMember({"scripted", "llm"}));
  dialogue->add_option("--npc", dopts.npc)->check(CLI::IsMember({"oracle", "llm"}));
  dialogue->add_option("--max-rounds", dopts.max_rounds)->check(CLI::PositiveNumber);
  dialogue->add_option("-o,--output", dopts.out, "Transcript JSONL");
  dialogue->add_option("--emit-kg", dopts.emit_kg, "Write the extracted target graph here");
  dialogue->add_option("--model", dopts.model, "Chat model name for llm roles");

  TrainOpts topts;
  auto add_train_flags = [&](CLI::App* cmd) {
    cmd->add_option("game", topts.game, "Game spec JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--profile", topts.profile)->check(CLI::IsMember({"full", "desk"}));
    cmd->add_option("--steps", topts.steps);
    cmd->add_option("--eval-every", topts.eval_every);
    cmd->add_option("--eval-episodes", topts.eval_episodes);
    cmd->add_option("--seeds", topts.seeds);
    cmd->add_option("--seed", topts.seed, "First seed of the sweep");
    cmd->add_option("--shaping-bonus", topts.shaping_bonus);
    cmd->add_option("--goal-reward", topts.goal_reward);
    cmd->add_option("--lr", topts.lr);
  };
  auto* train_cmd = app.add_subcommand("train", "Train one condition and write a metrics CSV");
  add_train_flags(train_cmd);
  train_cmd->add_option("--target-kg", topts.target_kg, "Enables shaping")->check(CLI::ExistingFile);
  train_cmd->add_option("-o,--output", topts.out, "Metrics CSV (stdout if omitted)");
  train_cmd->add_option("--checkpoint", topts.checkpoint, "Save the last seed's parameters");

  auto* compare_cmd = app.add_subcommand("compare", "Paired baseline/shaped sweep");
  add_train_flags(compare_cmd);
  compare_cmd->add_option("--target-kg", topts.target_kg)->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("-o,--output", topts.out, "Report directory")->required();
  compare_cmd->add_option("-j,--jobs", topts.jobs, "Worker threads (0 = all cores)");

  std::string oracle_game;
  int step_cap = kDefaultStepCap;
  double gamma = A2cConfig{}.gamma;
  auto* oracle = app.add_subcommand("oracle", "Exact optimum by value iteration");
  oracle->add_option("game", oracle_game)->required()->check(CLI::ExistingFile);
  oracle->add_option("--step-cap", step_cap)->check(CLI::PositiveNumber);
  oracle->add_option("--gamma", gamma);

  std::string play_game;
  auto* play = app.add_subcommand("play", "Play a game interactively");
  play->add_option("game", play_game)->required()->check(CLI::ExistingFile);
  play->add_option("--step-cap", step_cap)->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*dialogue) return run_dialogue_cmd(dopts);
    if (*train_cmd) return run_train_cmd(topts);
    if (*compare_cmd) return run_compare_cmd(topts);
    if (*oracle) return run_oracle_cmd(oracle_game, step_cap, gamma);
    if (*play) return run_play_cmd(play_game, step_cap);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
