#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "dshape/dialogue.hpp"
#include "dshape/error.hpp"
#include "dshape/harness.hpp"
#include "dshape/kg.hpp"
#include "dshape/learner.hpp"
#include "dshape/world.hpp"

namespace py = pybind11;
using namespace dshape;

namespace {

using TripleTuple = std::tuple<std::string, std::string, std::string>;

std::vector<TripleTuple> triples(const KnowledgeGraph& kg) {
  std::vector<TripleTuple> out;
  for (const Triple& t : kg.edges()) out.emplace_back(t.subject(), t.relation(), t.object());
  return out;
}

KnowledgeGraph target_from(const std::vector<TripleTuple>& edges) {
  std::set<Triple> s;
  for (const auto& [a, b, c] : edges) s.emplace(a, b, c);
  return KnowledgeGraph(KgKind::kTarget, std::move(s));
}

// Text-level session over the engine, for interactive use from Python.
class Game {
 public:
  explicit Game(GameSpec spec, int step_cap) : spec_(std::move(spec)), step_cap_(step_cap) { reset(); }

  py::dict reset() {
    Reset r = initial_state(spec_);
    state_ = r.state;
    return observation(r.observation);
  }

  std::vector<std::string> valid_actions() const {
    std::vector<std::string> out;
    for (const Action& a : dshape::valid_actions(spec_, state_)) out.push_back(action_text(spec_, a));
    return out;
  }

  py::tuple step(const std::string& command) {
    const auto action = parse_action(spec_, command);
    if (!action) throw py::value_error("unrecognised action \"" + command + "\"");
    StepResult r = dshape::step(spec_, state_, *action, step_cap_);
    state_ = r.state;
    return py::make_tuple(observation(r.observation), r.reward, r.done);
  }

  std::string room() const { return state_.current_room; }
  int steps_taken() const { return state_.steps_taken; }
  const GameSpec& spec() const { return spec_; }

 private:
  static py::dict observation(const ObservationBundle& o) {
    py::dict d;
    d["room_description"] = o.room_description;
    d["inventory_text"] = o.inventory_text;
    d["last_action_feedback"] = o.last_action_feedback;
    d["last_action_text"] = o.last_action_text;
    return d;
  }

  GameSpec spec_;
  int step_cap_;
  WorldState state_;
};

py::dict eval_dict(const EvalRecord& r) {
  py::dict d;
  d["step"] = r.step;
  d["mean_score"] = r.mean_score;
  d["std_score"] = r.std_score;
  d["condition"] = std::string(to_string(r.condition));
  if (r.seed) {
    d["seed"] = *r.seed;
  } else {
    d["seed"] = py::none();
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Text-adventure engine, knowledge graphs, dialogue and shaped actor-critic training";

  py::register_exception<LoadError>(m, "LoadError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InvalidActionError>(m, "InvalidActionError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<OracleError>(m, "OracleError", PyExc_RuntimeError);

  py::class_<GameSpec>(m, "GameSpec")
      .def_property_readonly("start_room", [](const GameSpec& s) { return s.start_room; })
      .def_property_readonly("goal_reward", [](const GameSpec& s) { return s.goal.reward; })
      .def_property_readonly("room_ids", [](const GameSpec& s) {
        std::vector<std::string> ids;
        for (const auto& r : s.rooms) ids.push_back(r.id);
        return ids;
      })
      .def("to_json", &dump_game_spec);

  m.def("load_game", [](const std::filesystem::path& p) { return load_game_spec_file(p); }, py::arg("path"));
  m.def("loads_game", [](const std::string& doc) { return load_game_spec(doc); }, py::arg("document"));

  py::class_<Game>(m, "Game")
      .def(py::init<GameSpec, int>(), py::arg("spec"), py::arg("step_cap") = kDefaultStepCap)
      .def("reset", &Game::reset)
      .def("valid_actions", &Game::valid_actions)
      .def("step", &Game::step, py::arg("action"))
      .def_property_readonly("room", &Game::room)
      .def_property_readonly("steps_taken", &Game::steps_taken);

  m.def("parse_kg", [](const std::string& text) { return triples(parse_kg_text(text)); }, py::arg("text"));
  m.def("filter_you_edges", [](const std::vector<TripleTuple>& e) { return triples(filter_you_edges(target_from(e))); });
  m.def("serialize_kg", [](const std::vector<TripleTuple>& e) { return serialize_kg(target_from(e)); });

  m.def(
      "scripted_dialogue",
      [](const GameSpec& spec, int max_rounds) {
        ScriptedQuestioner q(goal_phrase(spec));
        OracleNpc npc(spec);
        const DialogueTranscript t = run_dialogue(q, npc, max_rounds);
        py::list rounds;
        for (const auto& r : t.rounds) {
          py::list pairs;
          for (std::size_t i = 0; i < r.questions.size(); ++i) {
            pairs.append(py::make_tuple(r.questions[i].text, r.answers[i].text));
          }
          rounds.append(pairs);
        }
        py::dict d;
        d["rounds"] = rounds;
        d["outcome"] = t.outcome == DialogueOutcome::kSufficient ? "sufficient" : "exhausted";
        d["target_kg"] = t.outcome == DialogueOutcome::kSufficient ? py::cast(triples(extract_target_kg_structured(t)))
                                                                   : py::none();
        return d;
      },
      py::arg("spec"), py::arg("max_rounds") = kDefaultMaxRounds);

  m.def(
      "oracle",
      [](const GameSpec& spec, int step_cap, double gamma) {
        const OracleResult r = value_iteration(spec, gamma, step_cap);
        std::vector<std::string> path;
        for (const Action& a : r.path) path.push_back(action_text(spec, a));
        py::dict d;
        d["optimal_return"] = r.optimal_return;
        d["discounted_value"] = r.discounted_value;
        d["path"] = path;
        return d;
      },
      py::arg("spec"), py::arg("step_cap") = kDefaultStepCap, py::arg("gamma") = A2cConfig{}.gamma);

  m.def(
      "train",
      [](const GameSpec& spec, std::optional<std::vector<TripleTuple>> target, long total_steps, long eval_every,
         int eval_episodes, std::uint64_t seed, std::string profile) {
        std::optional<TrainConfig> cfg = profile_by_name(profile);
        if (!cfg) throw py::value_error("unknown profile \"" + profile + "\"");
        if (total_steps > 0) cfg->total_steps = total_steps;
        if (eval_every > 0) cfg->eval_every = eval_every;
        if (eval_episodes > 0) cfg->eval_episodes = eval_episodes;
        std::optional<KnowledgeGraph> kg;
        if (target) kg = target_from(*target);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = dshape::train(spec, *cfg, kg, seed);
        }
        py::list evals;
        for (const auto& e : r.evals) evals.append(eval_dict(e));
        return evals;
      },
      py::arg("spec"), py::arg("target") = py::none(), py::arg("total_steps") = 0, py::arg("eval_every") = 0,
      py::arg("eval_episodes") = 0, py::arg("seed") = 1, py::arg("profile") = "desk");

  m.def("metrics_header", [] { return std::string(kMetricsHeader); });
}
