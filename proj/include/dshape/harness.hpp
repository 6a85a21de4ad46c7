#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dshape/kg.hpp"
#include "dshape/learner.hpp"
#include "dshape/shaping.hpp"
#include "dshape/world.hpp"

namespace dshape {

struct TrainConfig {
  long total_steps = 100000;
  long eval_every = 450;
  int eval_episodes = 50;
  int n_seeds = 10;
  int step_cap = kDefaultStepCap;
  std::optional<int> goal_reward_override;
  double shaping_bonus = kDefaultShapingBonus;
  int feature_dim = kDefaultFeatureDim;
  int hidden = kDefaultHiddenWidth;
  std::uint64_t hash_seed = 0x5eedULL;
  A2cConfig a2c;
  std::uint64_t seed = 1;  // seed i of a sweep uses seed + i

  static TrainConfig full();
  static TrainConfig desk();  // 20000 steps, learning rate 3e-3

  // Throws ContractError on non-positive counts or eval_every > total_steps.
  void validate() const;
};

std::optional<TrainConfig> profile_by_name(std::string_view name);

enum class Condition { kBaseline, kShaped };
std::string_view to_string(Condition c);

struct EvalRecord {
  long step = 0;
  double mean_score = 0.0;
  double std_score = 0.0;
  Condition condition = Condition::kBaseline;
  std::optional<std::uint64_t> seed;  // empty for cross-seed aggregates

  friend bool operator==(const EvalRecord&, const EvalRecord&) = default;
};

struct EpisodeSummary {
  int engine_return = 0;
  double shaping_total = 0.0;
  std::size_t final_overlap = 0;  // |overlap(final internal KG, target)|
  int length = 0;
  bool won = false;
};

struct EvalEpisode {
  int score = 0;  // engine reward only
  int length = 0;
};

struct EvalDetail {
  EvalRecord record;
  std::vector<EvalEpisode> episodes;
};

// Greedy-policy evaluation without shaping. Throws ContractError when
// episodes < 1.
EvalDetail evaluate_detailed(const GameSpec& spec, const PolicyParams& params, int episodes,
                             int step_cap, std::uint64_t seed, std::uint64_t hash_seed);
EvalRecord evaluate(const GameSpec& spec, const PolicyParams& params, int episodes, int step_cap,
                    std::uint64_t seed, std::uint64_t hash_seed);

struct TrainResult {
  PolicyParams params;
  std::vector<EvalRecord> evals;
  std::vector<EpisodeSummary> episodes;  // completed training episodes only
  std::vector<double> step_rewards;      // engine + shaping, every training step
  int longest_eval_episode = 0;
  Condition condition = Condition::kBaseline;
};

// One training run for a single seed. With a target graph the run is shaped:
// the graph is reduced to its "you" edges and each step's reward gains the
// shaping bonus. Evaluation runs every eval_every training steps and does not
// consume the step budget.
TrainResult train(const GameSpec& spec, const TrainConfig& cfg,
                  const std::optional<KnowledgeGraph>& target, std::uint64_t seed);

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<EvalRecord> evals;
  std::optional<long> steps_to_perfect;
  double auc = 0.0;
};

struct ComparisonReport {
  int goal_reward = 0;
  std::vector<SeedRun> baseline;
  std::vector<SeedRun> shaped;
  std::vector<EvalRecord> baseline_curve;  // pooled across seeds
  std::vector<EvalRecord> shaped_curve;
  int win_pairs = 0;         // shaped steps-to-perfect <= baseline
  int strict_win_pairs = 0;  // shaped steps-to-perfect <  baseline
  int auc_win_pairs = 0;     // shaped AUC >= baseline AUC
};

std::optional<long> steps_to_first_perfect(const std::vector<EvalRecord>& evals, int goal_reward);
double curve_area(const std::vector<EvalRecord>& evals);
std::vector<EvalRecord> pool_curves(const std::vector<SeedRun>& runs, Condition condition);

// Runs cfg.n_seeds matched (baseline, shaped) pairs; seeds run on worker
// threads, results are independent of scheduling.
ComparisonReport compare(const GameSpec& spec, const TrainConfig& cfg, const KnowledgeGraph& target,
                         unsigned jobs = 0);

inline constexpr std::string_view kMetricsHeader = "step,mean_score,std_score,condition,seed";

void write_metrics_csv(std::ostream& out, const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_metrics_csv(std::istream& in);

// Per-condition CSVs, per-seed CSVs and summary.json under dir.
void write_report(const std::filesystem::path& dir, const ComparisonReport& report);

}  // namespace dshape
