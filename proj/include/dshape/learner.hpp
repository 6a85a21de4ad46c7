#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "dshape/kg.hpp"
#include "dshape/world.hpp"

namespace dshape {

inline constexpr int kDefaultFeatureDim = 256;
inline constexpr int kDefaultHiddenWidth = 64;

struct FeatureVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Signed feature hashing. Each observation channel owns one quarter of the
// vector; knowledge-graph triples hash across the whole vector.
FeatureVector featurize(const ObservationBundle& obs, const KnowledgeGraph& kg, int dim,
                        std::uint64_t hash_seed);

// One-hidden-layer actor-critic: tanh hidden layer, a policy head with one
// logit per action-universe entry and a scalar value head. All weights live in
// one flat vector so optimizers and gradient checks can treat them uniformly.
class PolicyParams {
 public:
  PolicyParams() = default;
  PolicyParams(int feature_dim, int hidden, int actions);

  // Weights uniform in [-scale, scale], biases zero.
  static PolicyParams random(int feature_dim, int hidden, int actions, std::uint64_t seed,
                             double scale = 0.05);

  int feature_dim() const { return feature_dim_; }
  int hidden() const { return hidden_; }
  int actions() const { return actions_; }
  std::uint64_t update_count() const { return update_count_; }
  void set_update_count(std::uint64_t n) { update_count_ = n; }

  std::span<double> theta() { return theta_; }
  std::span<const double> theta() const { return theta_; }

  // Layout views into theta().
  double& w1(int h, int d) { return theta_[static_cast<std::size_t>(h) * feature_dim_ + d]; }
  double w1(int h, int d) const { return theta_[static_cast<std::size_t>(h) * feature_dim_ + d]; }
  std::size_t b1_offset() const { return static_cast<std::size_t>(hidden_) * feature_dim_; }
  std::size_t wp_offset() const { return b1_offset() + hidden_; }
  std::size_t bp_offset() const { return wp_offset() + static_cast<std::size_t>(actions_) * hidden_; }
  std::size_t wv_offset() const { return bp_offset() + actions_; }
  std::size_t bv_offset() const { return wv_offset() + hidden_; }
  static std::size_t parameter_count(int feature_dim, int hidden, int actions);

  bool all_finite() const;

  friend bool operator==(const PolicyParams&, const PolicyParams&) = default;

 private:
  int feature_dim_ = 0;
  int hidden_ = 0;
  int actions_ = 0;
  std::uint64_t update_count_ = 0;
  std::vector<double> theta_;
};

// Action-validity mask over the action universe.
using ActionMask = std::vector<std::uint8_t>;

ActionMask action_mask(const GameSpec& spec, const std::vector<Action>& universe,
                       const WorldState& state);

struct Forward {
  std::vector<double> hidden;
  std::vector<double> logits;
  std::vector<double> probs;  // masked softmax; exactly 0 off-mask
  double value = 0.0;
};

Forward forward(const PolicyParams& params, const FeatureVector& f, const ActionMask& mask);

enum class SelectMode { kSample, kGreedy };

// Deterministic uniform double in [0, 1) from a 64-bit engine.
double uniform01(std::mt19937_64& rng);

// Greedy ties go to the lowest index. Throws ContractError on an empty mask.
int select_action(const PolicyParams& params, const FeatureVector& f, const ActionMask& mask,
                  SelectMode mode, std::mt19937_64& rng);

struct TrajectoryStep {
  FeatureVector features;
  int action = 0;
  ActionMask mask;
  double reward = 0.0;  // engine + shaping
  bool done = false;
};

struct Trajectory {
  std::vector<TrajectoryStep> steps;
};

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

struct A2cConfig {
  double gamma = 0.9;
  double learning_rate = 1e-3;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
};

// A single-step actor-critic loss with the advantage held fixed:
//   -advantage * log pi(a|s) - entropy_coef * H(pi(.|s)) + value_coef * (G - V(s))^2
struct LossSample {
  FeatureVector features;
  ActionMask mask;
  int action = 0;
  double target_return = 0.0;
  double advantage = 0.0;
};

double sample_loss(const PolicyParams& params, const LossSample& sample, double value_coef,
                   double entropy_coef);

// Adds d(sample_loss)/d(theta) * scale into grad (same layout as theta).
void accumulate_gradient(const PolicyParams& params, const LossSample& sample, double value_coef,
                         double entropy_coef, double scale, std::span<double> grad);

// Discounted returns per step, advantage = return - V(s), mean loss gradient
// over every step in the batch, one SGD step. Throws UpdateError naming the
// first trajectory that produces a non-finite value.
PolicyParams a2c_update(const PolicyParams& params, const std::vector<Trajectory>& batch,
                        const A2cConfig& config);

struct OracleResult {
  int optimal_return = 0;   // undiscounted, within the step cap
  double discounted_value = 0.0;
  std::optional<int> path_length;  // shortest winning path, if any
  std::vector<Action> path;
  std::size_t states_explored = 0;
};

inline constexpr std::size_t kDefaultOracleStateBound = 1'000'000;

// Exact finite-horizon optimum by backward induction over the reachable state
// graph. Throws OracleError when more than state_bound states are reachable.
OracleResult value_iteration(const GameSpec& spec, double gamma, int step_cap,
                             std::size_t state_bound = kDefaultOracleStateBound);

}  // namespace dshape
