#include "dshape/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dshape/error.hpp"
#include "text.hpp"

namespace dshape {

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_token(std::uint64_t seed, char channel, std::string_view token) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  auto feed = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  feed(static_cast<unsigned char>(channel));
  for (char c : token) feed(static_cast<unsigned char>(c));
  return mix64(h);
}

void add_hashed(std::vector<double>& v, std::size_t offset, std::size_t width, std::uint64_t h) {
  const std::size_t idx = offset + static_cast<std::size_t>(h % width);
  v[idx] += (h >> 63) ? 1.0 : -1.0;
}

// log-softmax restricted to the mask; off-mask entries are -inf.
void masked_log_softmax(const std::vector<double>& logits, const ActionMask& mask,
                        std::vector<double>& logp, std::vector<double>& probs) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) top = std::max(top, logits[i]);
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (mask[i]) sum += std::exp(logits[i] - top);
  }
  const double log_z = top + std::log(sum);
  logp.assign(logits.size(), -std::numeric_limits<double>::infinity());
  probs.assign(logits.size(), 0.0);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!mask[i]) continue;
    logp[i] = logits[i] - log_z;
    probs[i] = std::exp(logp[i]);
  }
}

void check_mask(const PolicyParams& params, const ActionMask& mask) {
  if (mask.size() != static_cast<std::size_t>(params.actions())) {
    throw ContractError("action mask size does not match the policy head");
  }
  if (std::none_of(mask.begin(), mask.end(), [](std::uint8_t m) { return m != 0; })) {
    throw ContractError("action mask admits no action");
  }
}

}  // namespace

FeatureVector featurize(const ObservationBundle& obs, const KnowledgeGraph& kg, int dim,
                        std::uint64_t hash_seed) {
  if (dim < 4 || dim % 4 != 0) throw ContractError("feature dimension must be a positive multiple of 4");
  FeatureVector f;
  f.values.assign(static_cast<std::size_t>(dim), 0.0);
  const std::size_t quarter = static_cast<std::size_t>(dim) / 4;
  const std::string* channels[4] = {&obs.room_description, &obs.inventory_text,
                                    &obs.last_action_feedback, &obs.last_action_text};
  for (std::size_t c = 0; c < 4; ++c) {
    for (const auto& w : text::words(*channels[c])) {
      add_hashed(f.values, c * quarter, quarter, hash_token(hash_seed, static_cast<char>('0' + c), w));
    }
  }
  for (const Triple& t : kg.edges()) {
    const std::string key = t.subject() + '\x1f' + t.relation() + '\x1f' + t.object();
    add_hashed(f.values, 0, static_cast<std::size_t>(dim), hash_token(hash_seed, 'k', key));
  }
  return f;
}

std::size_t PolicyParams::parameter_count(int d, int h, int a) {
  return static_cast<std::size_t>(h) * d + h + static_cast<std::size_t>(a) * h + a + h + 1;
}

PolicyParams::PolicyParams(int feature_dim, int hidden, int actions)
    : feature_dim_(feature_dim), hidden_(hidden), actions_(actions) {
  if (feature_dim < 1 || hidden < 1 || actions < 1) {
    throw ContractError("policy dimensions must be positive");
  }
  theta_.assign(parameter_count(feature_dim, hidden, actions), 0.0);
}

PolicyParams PolicyParams::random(int feature_dim, int hidden, int actions, std::uint64_t seed,
                                  double scale) {
  PolicyParams p(feature_dim, hidden, actions);
  std::mt19937_64 rng(seed);
  auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) p.theta_[i] = (2.0 * uniform01(rng) - 1.0) * scale;
  };
  fill(0, p.b1_offset());
  fill(p.wp_offset(), p.bp_offset());
  fill(p.wv_offset(), p.bv_offset());
  return p;
}

bool PolicyParams::all_finite() const {
  return std::all_of(theta_.begin(), theta_.end(), [](double x) { return std::isfinite(x); });
}

ActionMask action_mask(const GameSpec& spec, const std::vector<Action>& universe,
                       const WorldState& state) {
  ActionMask mask(universe.size(), 0);
  for (const Action& a : valid_actions(spec, state)) {
    auto it = std::find(universe.begin(), universe.end(), a);
    if (it == universe.end()) throw ContractError("valid action missing from the action universe");
    mask[static_cast<std::size_t>(it - universe.begin())] = 1;
  }
  return mask;
}

Forward forward(const PolicyParams& params, const FeatureVector& f, const ActionMask& mask) {
  const int D = params.feature_dim();
  const int H = params.hidden();
  const int A = params.actions();
  if (f.size() != static_cast<std::size_t>(D)) throw ContractError("feature vector has the wrong size");
  check_mask(params, mask);
  const auto theta = params.theta();

  std::vector<std::size_t> active;
  for (int d = 0; d < D; ++d) {
    if (f.values[d] != 0.0) active.push_back(static_cast<std::size_t>(d));
  }

  Forward out;
  out.hidden.resize(H);
  for (int h = 0; h < H; ++h) {
    double a = theta[params.b1_offset() + h];
    const double* row = theta.data() + static_cast<std::size_t>(h) * D;
    for (std::size_t d : active) a += row[d] * f.values[d];
    out.hidden[h] = std::tanh(a);
  }
  out.logits.resize(A);
  for (int i = 0; i < A; ++i) {
    double z = theta[params.bp_offset() + i];
    const double* row = theta.data() + params.wp_offset() + static_cast<std::size_t>(i) * H;
    for (int h = 0; h < H; ++h) z += row[h] * out.hidden[h];
    out.logits[i] = z;
  }
  double v = theta[params.bv_offset()];
  for (int h = 0; h < H; ++h) v += theta[params.wv_offset() + h] * out.hidden[h];
  out.value = v;

  std::vector<double> logp;
  masked_log_softmax(out.logits, mask, logp, out.probs);
  return out;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int select_action(const PolicyParams& params, const FeatureVector& f, const ActionMask& mask,
                  SelectMode mode, std::mt19937_64& rng) {
  const Forward fw = forward(params, f, mask);
  const int A = params.actions();
  if (mode == SelectMode::kGreedy) {
    int best = -1;
    for (int i = 0; i < A; ++i) {
      if (!mask[i]) continue;
      if (best < 0 || fw.logits[i] > fw.logits[best]) best = i;
    }
    return best;
  }
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_valid = -1;
  for (int i = 0; i < A; ++i) {
    if (!mask[i]) continue;
    last_valid = i;
    acc += fw.probs[i];
    if (u < acc) return i;
  }
  return last_valid;  // rounding left u above the final cumulative sum
}

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  std::vector<double> out(rewards.size());
  double g = 0.0;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    g = rewards[i] + gamma * g;
    out[i] = g;
  }
  return out;
}

double sample_loss(const PolicyParams& params, const LossSample& s, double value_coef,
                   double entropy_coef) {
  const Forward fw = forward(params, s.features, s.mask);
  if (!s.mask.at(static_cast<std::size_t>(s.action))) throw ContractError("chosen action is masked out");
  std::vector<double> logp, probs;
  masked_log_softmax(fw.logits, s.mask, logp, probs);
  double entropy = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (s.mask[i]) entropy -= probs[i] * logp[i];
  }
  const double err = s.target_return - fw.value;
  return -s.advantage * logp[s.action] - entropy_coef * entropy + value_coef * err * err;
}

void accumulate_gradient(const PolicyParams& params, const LossSample& s, double value_coef,
                         double entropy_coef, double scale, std::span<double> grad) {
  const int D = params.feature_dim();
  const int H = params.hidden();
  const int A = params.actions();
  if (grad.size() != params.theta().size()) throw ContractError("gradient buffer has the wrong size");
  if (!s.mask.at(static_cast<std::size_t>(s.action))) throw ContractError("chosen action is masked out");
  const Forward fw = forward(params, s.features, s.mask);
  const auto theta = params.theta();

  std::vector<double> logp, probs;
  masked_log_softmax(fw.logits, s.mask, logp, probs);
  double entropy = 0.0;
  for (int i = 0; i < A; ++i) {
    if (s.mask[i]) entropy -= probs[i] * logp[i];
  }

  std::vector<double> g_logit(A, 0.0);
  for (int i = 0; i < A; ++i) {
    if (!s.mask[i]) continue;
    const double indicator = i == s.action ? 1.0 : 0.0;
    g_logit[i] = -s.advantage * (indicator - probs[i]) + entropy_coef * probs[i] * (logp[i] + entropy);
  }
  const double g_value = -2.0 * value_coef * (s.target_return - fw.value);

  std::vector<double> g_hidden(H, 0.0);
  for (int i = 0; i < A; ++i) {
    if (g_logit[i] == 0.0) continue;
    const std::size_t row = params.wp_offset() + static_cast<std::size_t>(i) * H;
    for (int h = 0; h < H; ++h) {
      grad[row + h] += scale * g_logit[i] * fw.hidden[h];
      g_hidden[h] += g_logit[i] * theta[row + h];
    }
    grad[params.bp_offset() + i] += scale * g_logit[i];
  }
  for (int h = 0; h < H; ++h) {
    grad[params.wv_offset() + h] += scale * g_value * fw.hidden[h];
    g_hidden[h] += g_value * theta[params.wv_offset() + h];
  }
  grad[params.bv_offset()] += scale * g_value;

  for (int h = 0; h < H; ++h) {
    const double g_pre = g_hidden[h] * (1.0 - fw.hidden[h] * fw.hidden[h]);
    if (g_pre == 0.0) continue;
    const std::size_t row = static_cast<std::size_t>(h) * D;
    for (int d = 0; d < D; ++d) {
      if (s.features.values[d] != 0.0) grad[row + d] += scale * g_pre * s.features.values[d];
    }
    grad[params.b1_offset() + h] += scale * g_pre;
  }
}

PolicyParams a2c_update(const PolicyParams& params, const std::vector<Trajectory>& batch,
                        const A2cConfig& config) {
  std::size_t total_steps = 0;
  for (const auto& t : batch) total_steps += t.steps.size();
  if (total_steps == 0) return params;

  std::vector<double> grad(params.theta().size(), 0.0);
  const double scale = 1.0 / static_cast<double>(total_steps);
  for (std::size_t ti = 0; ti < batch.size(); ++ti) {
    const auto& steps = batch[ti].steps;
    std::vector<double> rewards;
    rewards.reserve(steps.size());
    for (const auto& s : steps) {
      if (!std::isfinite(s.reward)) throw UpdateError(ti, "trajectory " + std::to_string(ti) + " has a non-finite reward");
      rewards.push_back(s.reward);
    }
    const auto returns = discounted_returns(rewards, config.gamma);
    for (std::size_t k = 0; k < steps.size(); ++k) {
      const auto& s = steps[k];
      const double v = forward(params, s.features, s.mask).value;
      LossSample sample{s.features, s.mask, s.action, returns[k], returns[k] - v};
      if (!std::isfinite(sample.advantage)) {
        throw UpdateError(ti, "trajectory " + std::to_string(ti) + " produced a non-finite advantage");
      }
      accumulate_gradient(params, sample, config.value_coef, config.entropy_coef, scale, grad);
    }
    if (!std::all_of(grad.begin(), grad.end(), [](double g) { return std::isfinite(g); })) {
      throw UpdateError(ti, "trajectory " + std::to_string(ti) + " produced a non-finite gradient");
    }
  }

  PolicyParams next = params;
  auto theta = next.theta();
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= config.learning_rate * grad[i];
  if (!next.all_finite()) throw UpdateError(0, "update produced non-finite parameters");
  next.set_update_count(params.update_count() + 1);
  return next;
}

}  // namespace dshape
