#include "dshape/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "dshape/error.hpp"

namespace dshape {

namespace {

constexpr std::uint64_t kInitStream = 0x1f1e1d1c1b1a1918ULL;
constexpr std::uint64_t kActStream = 0x0102030405060708ULL;

struct EpisodeContext {
  const GameSpec& spec;
  const std::vector<Action>& universe;
  int feature_dim;
  std::uint64_t hash_seed;
};

KnowledgeGraph fresh_internal(const GameSpec& spec, const Reset& reset) {
  return update_internal(KnowledgeGraph(KgKind::kInternal), spec, reset.state, reset.observation);
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Runs f(i) for i in [0, n) across worker threads.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

TrainConfig TrainConfig::full() { return TrainConfig{}; }

TrainConfig TrainConfig::desk() {
  TrainConfig cfg;
  cfg.total_steps = 20000;
  cfg.a2c.learning_rate = 3e-3;
  return cfg;
}

void TrainConfig::validate() const {
  if (total_steps < 1) throw ContractError("total_steps must be positive");
  if (eval_every < 1) throw ContractError("eval_every must be positive");
  if (eval_every > total_steps) throw ContractError("eval_every must not exceed total_steps");
  if (eval_episodes < 1) throw ContractError("eval_episodes must be positive");
  if (n_seeds < 1) throw ContractError("n_seeds must be positive");
  if (step_cap < 1) throw ContractError("step_cap must be positive");
  if (goal_reward_override && *goal_reward_override <= 0) {
    throw ContractError("goal reward override must be positive");
  }
  if (!(shaping_bonus >= 0.0)) throw ContractError("shaping bonus must be non-negative");
  if (feature_dim < 4 || feature_dim % 4 != 0) {
    throw ContractError("feature_dim must be a positive multiple of 4");
  }
  if (hidden < 1) throw ContractError("hidden width must be positive");
}

std::optional<TrainConfig> profile_by_name(std::string_view name) {
  if (name == "full") return TrainConfig::full();
  if (name == "desk") return TrainConfig::desk();
  return std::nullopt;
}

std::string_view to_string(Condition c) { return c == Condition::kShaped ? "shaped" : "baseline"; }

EvalDetail evaluate_detailed(const GameSpec& spec, const PolicyParams& params, int episodes,
                             int step_cap, std::uint64_t seed, std::uint64_t hash_seed) {
  if (episodes < 1) throw ContractError("evaluation needs at least one episode");
  const auto universe = action_universe(spec);
  std::mt19937_64 rng(seed ^ kActStream);
  EvalDetail detail;
  double sum = 0.0, sum_sq = 0.0;
  for (int ep = 0; ep < episodes; ++ep) {
    Reset reset = initial_state(spec);
    WorldState state = std::move(reset.state);
    ObservationBundle obs = std::move(reset.observation);
    KnowledgeGraph kg = update_internal(KnowledgeGraph(KgKind::kInternal), spec, state, obs);
    EvalEpisode e;
    while (!state.done) {
      const FeatureVector f = featurize(obs, kg, params.feature_dim(), hash_seed);
      const int a = select_action(params, f, action_mask(spec, universe, state), SelectMode::kGreedy, rng);
      StepResult r = step(spec, state, universe[static_cast<std::size_t>(a)], step_cap);
      e.score += r.reward;
      state = std::move(r.state);
      obs = std::move(r.observation);
      kg = update_internal(kg, spec, state, obs);
    }
    e.length = state.steps_taken;
    sum += e.score;
    sum_sq += static_cast<double>(e.score) * e.score;
    detail.episodes.push_back(e);
  }
  const double mean = sum / episodes;
  const double var = std::max(0.0, sum_sq / episodes - mean * mean);
  detail.record.mean_score = mean;
  detail.record.std_score = std::sqrt(var);
  detail.record.seed = seed;
  return detail;
}

EvalRecord evaluate(const GameSpec& spec, const PolicyParams& params, int episodes, int step_cap,
                    std::uint64_t seed, std::uint64_t hash_seed) {
  return evaluate_detailed(spec, params, episodes, step_cap, seed, hash_seed).record;
}

TrainResult train(const GameSpec& base_spec, const TrainConfig& cfg,
                  const std::optional<KnowledgeGraph>& target_in, std::uint64_t seed) {
  cfg.validate();
  GameSpec spec = base_spec;
  if (cfg.goal_reward_override) spec.goal.reward = *cfg.goal_reward_override;

  std::optional<KnowledgeGraph> target;
  if (target_in) target = filter_you_edges(*target_in);

  const auto universe = action_universe(spec);
  TrainResult result;
  result.condition = target ? Condition::kShaped : Condition::kBaseline;
  result.params = PolicyParams::random(cfg.feature_dim, cfg.hidden, static_cast<int>(universe.size()),
                                       seed ^ kInitStream);
  result.step_rewards.reserve(static_cast<std::size_t>(cfg.total_steps));
  std::mt19937_64 rng(seed ^ kActStream);

  long steps_done = 0;
  while (steps_done < cfg.total_steps) {
    Reset reset = initial_state(spec);
    KnowledgeGraph kg = fresh_internal(spec, reset);
    WorldState state = std::move(reset.state);
    ObservationBundle obs = std::move(reset.observation);

    ShapingState shaping = ShapingState::fresh(cfg.shaping_bonus);
    EpisodeSummary summary;
    // Overlap already present at reset is paid with the first transition.
    double pending_bonus = 0.0;
    if (target) {
      ShapingStep s = shaping_reward(shaping, kg, *target);
      pending_bonus = s.bonus;
      summary.shaping_total += s.bonus;
      shaping = std::move(s.state);
    }

    Trajectory traj;
    while (!state.done && steps_done < cfg.total_steps) {
      TrajectoryStep ts;
      ts.features = featurize(obs, kg, cfg.feature_dim, cfg.hash_seed);
      ts.mask = action_mask(spec, universe, state);
      ts.action = select_action(result.params, ts.features, ts.mask, SelectMode::kSample, rng);

      StepResult r = step(spec, state, universe[static_cast<std::size_t>(ts.action)], cfg.step_cap);
      kg = update_internal(kg, spec, r.state, r.observation);
      double reward = static_cast<double>(r.reward) + pending_bonus;
      pending_bonus = 0.0;
      if (target) {
        ShapingStep s = shaping_reward(shaping, kg, *target);
        reward += s.bonus;
        summary.shaping_total += s.bonus;
        shaping = std::move(s.state);
      }
      summary.engine_return += r.reward;
      summary.won = summary.won || r.won;
      ts.reward = reward;
      ts.done = r.done;
      traj.steps.push_back(std::move(ts));
      result.step_rewards.push_back(reward);

      state = std::move(r.state);
      obs = std::move(r.observation);
      ++steps_done;

      if (steps_done % cfg.eval_every == 0) {
        EvalDetail detail =
            evaluate_detailed(spec, result.params, cfg.eval_episodes, cfg.step_cap, seed, cfg.hash_seed);
        for (const auto& e : detail.episodes) {
          result.longest_eval_episode = std::max(result.longest_eval_episode, e.length);
        }
        EvalRecord rec = detail.record;
        rec.step = steps_done;
        rec.condition = result.condition;
        result.evals.push_back(rec);
      }
    }

    if (state.done) {
      summary.length = state.steps_taken;
      summary.final_overlap = target ? overlap(kg, *target).size() : 0;
      result.episodes.push_back(summary);
      result.params = a2c_update(result.params, {traj}, cfg.a2c);
    }
  }
  return result;
}

std::optional<long> steps_to_first_perfect(const std::vector<EvalRecord>& evals, int goal_reward) {
  for (const auto& r : evals) {
    if (r.mean_score >= static_cast<double>(goal_reward)) return r.step;
  }
  return std::nullopt;
}

double curve_area(const std::vector<EvalRecord>& evals) {
  double area = 0.0;
  long prev_step = 0;
  for (const auto& r : evals) {
    area += r.mean_score * static_cast<double>(r.step - prev_step);
    prev_step = r.step;
  }
  return area;
}

std::vector<EvalRecord> pool_curves(const std::vector<SeedRun>& runs, Condition condition) {
  std::vector<EvalRecord> out;
  if (runs.empty()) return out;
  std::size_t points = runs.front().evals.size();
  for (const auto& r : runs) points = std::min(points, r.evals.size());
  for (std::size_t k = 0; k < points; ++k) {
    // Every seed contributes the same number of episodes, so the pooled
    // moments are averages of per-seed moments.
    double m = 0.0, second = 0.0;
    for (const auto& r : runs) {
      const EvalRecord& e = r.evals[k];
      m += e.mean_score;
      second += e.std_score * e.std_score + e.mean_score * e.mean_score;
    }
    const double n = static_cast<double>(runs.size());
    m /= n;
    second /= n;
    EvalRecord rec;
    rec.step = runs.front().evals[k].step;
    rec.mean_score = m;
    rec.std_score = std::sqrt(std::max(0.0, second - m * m));
    rec.condition = condition;
    out.push_back(rec);
  }
  return out;
}

ComparisonReport compare(const GameSpec& spec, const TrainConfig& cfg, const KnowledgeGraph& target,
                         unsigned jobs) {
  cfg.validate();
  const std::size_t n = static_cast<std::size_t>(cfg.n_seeds);
  ComparisonReport report;
  report.goal_reward = cfg.goal_reward_override.value_or(spec.goal.reward);
  report.baseline.resize(n);
  report.shaped.resize(n);

  parallel_for(2 * n, jobs, [&](std::size_t job) {
    const std::size_t i = job / 2;
    const bool shaped = job % 2 == 1;
    const std::uint64_t seed = cfg.seed + i;
    TrainResult r = train(spec, cfg, shaped ? std::optional<KnowledgeGraph>(target) : std::nullopt, seed);
    SeedRun run;
    run.seed = seed;
    run.evals = std::move(r.evals);
    run.steps_to_perfect = steps_to_first_perfect(run.evals, report.goal_reward);
    run.auc = curve_area(run.evals);
    (shaped ? report.shaped : report.baseline)[i] = std::move(run);
  });

  for (std::size_t i = 0; i < n; ++i) {
    const auto& b = report.baseline[i];
    const auto& s = report.shaped[i];
    // A run that never reaches a perfect evaluation counts as infinitely slow.
    const bool le = !b.steps_to_perfect || (s.steps_to_perfect && *s.steps_to_perfect <= *b.steps_to_perfect);
    const bool lt = s.steps_to_perfect && (!b.steps_to_perfect || *s.steps_to_perfect < *b.steps_to_perfect);
    report.win_pairs += le ? 1 : 0;
    report.strict_win_pairs += lt ? 1 : 0;
    report.auc_win_pairs += s.auc >= b.auc ? 1 : 0;
  }
  report.baseline_curve = pool_curves(report.baseline, Condition::kBaseline);
  report.shaped_curve = pool_curves(report.shaped, Condition::kShaped);
  return report;
}

void write_metrics_csv(std::ostream& out, const std::vector<EvalRecord>& records) {
  out << kMetricsHeader << '\n';
  for (const auto& r : records) {
    out << r.step << ',' << format_double(r.mean_score) << ',' << format_double(r.std_score) << ','
        << to_string(r.condition) << ',' << (r.seed ? std::to_string(*r.seed) : std::string("all"))
        << '\n';
  }
}

std::vector<EvalRecord> read_metrics_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw std::runtime_error("metrics csv: line 1: expected header \"" + std::string(kMetricsHeader) + "\"");
  }
  std::vector<EvalRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) cols.push_back(col);
    if (cols.size() != 5) throw std::runtime_error("metrics csv: line " + std::to_string(line_no) + ": expected 5 columns");
    try {
      EvalRecord r;
      r.step = std::stol(cols[0]);
      r.mean_score = std::stod(cols[1]);
      r.std_score = std::stod(cols[2]);
      if (cols[3] == "baseline") {
        r.condition = Condition::kBaseline;
      } else if (cols[3] == "shaped") {
        r.condition = Condition::kShaped;
      } else {
        throw std::runtime_error("unknown condition \"" + cols[3] + "\"");
      }
      if (cols[4] != "all") r.seed = std::stoull(cols[4]);
      out.push_back(r);
    } catch (const std::exception& e) {
      throw std::runtime_error("metrics csv: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_report(const std::filesystem::path& dir, const ComparisonReport& report) {
  std::filesystem::create_directories(dir);
  auto write_csv = [&](const std::string& name, const std::vector<EvalRecord>& rows) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    write_metrics_csv(out, rows);
  };
  write_csv("baseline.csv", report.baseline_curve);
  write_csv("shaped.csv", report.shaped_curve);
  auto flatten = [](const std::vector<SeedRun>& runs) {
    std::vector<EvalRecord> rows;
    for (const auto& r : runs) rows.insert(rows.end(), r.evals.begin(), r.evals.end());
    return rows;
  };
  write_csv("baseline_seeds.csv", flatten(report.baseline));
  write_csv("shaped_seeds.csv", flatten(report.shaped));

  using Json = nlohmann::ordered_json;
  auto steps = [](const std::vector<SeedRun>& runs) {
    Json arr = Json::array();
    for (const auto& r : runs) arr.push_back(r.steps_to_perfect ? Json(*r.steps_to_perfect) : Json(nullptr));
    return arr;
  };
  Json seeds = Json::array();
  for (const auto& r : report.baseline) seeds.push_back(r.seed);
  Json summary = {
      {"goal_reward", report.goal_reward},
      {"seeds", seeds},
      {"steps_to_perfect", {{"baseline", steps(report.baseline)}, {"shaped", steps(report.shaped)}}},
      {"win_pairs", report.win_pairs},
      {"strict_win_pairs", report.strict_win_pairs},
      {"auc_win_pairs", report.auc_win_pairs},
  };
  std::ofstream out(dir / "summary.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / "summary.json").string());
  out << summary.dump(2) << '\n';
}

}  // namespace dshape
