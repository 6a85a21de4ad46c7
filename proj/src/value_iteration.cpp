#include <algorithm>
#include <climits>
#include <deque>
#include <map>
#include <string>

#include "dshape/error.hpp"
#include "dshape/learner.hpp"

namespace dshape {

namespace {

// Step count and done flag are excluded: the horizon is handled by the
// backward induction itself.
std::string state_key(const WorldState& s) {
  std::string key = s.current_room;
  key += '|';
  for (const auto& [id, loc] : s.object_locations) key += id + '=' + loc + ';';
  key += '|';
  for (const auto& [id, alive] : s.character_alive) key += id + (alive ? "+" : "-");
  return key;
}

struct Edge {
  Action action;
  std::size_t next = 0;
  int reward = 0;
  bool terminal = false;
};

}  // namespace

OracleResult value_iteration(const GameSpec& spec, double gamma, int step_cap,
                             std::size_t state_bound) {
  if (step_cap < 1) throw ContractError("step_cap must be positive");

  std::vector<WorldState> states;
  std::vector<std::vector<Edge>> edges;
  std::map<std::string, std::size_t> index;

  WorldState start = initial_state(spec).state;
  index.emplace(state_key(start), 0);
  states.push_back(start);

  // Reachability sweep; each state is expanded once.
  for (std::size_t i = 0; i < states.size(); ++i) {
    std::vector<Edge> out;
    for (const Action& a : valid_actions(spec, states[i])) {
      StepResult r = step(spec, states[i], a, INT_MAX);
      Edge e{a, 0, r.reward, r.won};
      if (!r.won) {
        WorldState next = r.state;
        next.steps_taken = 0;
        next.done = false;
        auto [it, inserted] = index.emplace(state_key(next), states.size());
        if (inserted) {
          if (states.size() >= state_bound) {
            throw OracleError("reachable state space exceeds the bound of " +
                              std::to_string(state_bound));
          }
          states.push_back(std::move(next));
        }
        e.next = it->second;
      }
      out.push_back(std::move(e));
    }
    edges.push_back(std::move(out));
  }

  const std::size_t n = states.size();
  std::vector<double> value(n, 0.0), next_value(n);
  std::vector<double> dvalue(n, 0.0), next_dvalue(n);
  for (int k = 1; k <= step_cap; ++k) {
    for (std::size_t s = 0; s < n; ++s) {
      double best = 0.0, dbest = 0.0;
      bool any = false;
      for (const Edge& e : edges[s]) {
        const double v = e.reward + (e.terminal ? 0.0 : value[e.next]);
        const double dv = e.reward + (e.terminal ? 0.0 : gamma * dvalue[e.next]);
        if (!any || v > best) best = v;
        if (!any || dv > dbest) dbest = dv;
        any = true;
      }
      next_value[s] = best;
      next_dvalue[s] = dbest;
    }
    value.swap(next_value);
    dvalue.swap(next_dvalue);
  }

  OracleResult result;
  result.optimal_return = static_cast<int>(std::lround(value[0]));
  result.discounted_value = dvalue[0];
  result.states_explored = n;

  // Shortest winning path by breadth-first search.
  std::vector<int> depth(n, -1);
  std::vector<std::pair<std::size_t, std::size_t>> parent(n);  // (state, edge)
  std::deque<std::size_t> queue{0};
  depth[0] = 0;
  std::optional<std::pair<std::size_t, std::size_t>> win;
  while (!queue.empty() && !win) {
    const std::size_t s = queue.front();
    queue.pop_front();
    for (std::size_t ei = 0; ei < edges[s].size(); ++ei) {
      const Edge& e = edges[s][ei];
      if (e.terminal) {
        win = {s, ei};
        break;
      }
      if (depth[e.next] < 0) {
        depth[e.next] = depth[s] + 1;
        parent[e.next] = {s, ei};
        queue.push_back(e.next);
      }
    }
  }
  if (win && depth[win->first] + 1 <= step_cap) {
    std::vector<Action> path{edges[win->first][win->second].action};
    for (std::size_t s = win->first; s != 0; s = parent[s].first) {
      path.push_back(edges[parent[s].first][parent[s].second].action);
    }
    std::reverse(path.begin(), path.end());
    result.path_length = static_cast<int>(path.size());
    result.path = std::move(path);
  }
  return result;
}

}  // namespace dshape
