#include "dshape/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dshape/error.hpp"

namespace dshape {

namespace {

using Json = nlohmann::ordered_json;

std::string hex_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  return buf;
}

double parse_hex_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw LoadError("checkpoint: bad number \"" + s + "\"");
  return v;
}

}  // namespace

std::string dump_checkpoint(const Checkpoint& c) {
  const TrainConfig& cfg = c.config;
  Json theta = Json::array();
  for (double v : c.params.theta()) theta.push_back(hex_double(v));
  Json j = {
      {"version", kCheckpointVersion},
      {"seed", c.seed},
      {"config",
       {{"total_steps", cfg.total_steps},
        {"eval_every", cfg.eval_every},
        {"eval_episodes", cfg.eval_episodes},
        {"n_seeds", cfg.n_seeds},
        {"step_cap", cfg.step_cap},
        {"goal_reward_override", cfg.goal_reward_override ? Json(*cfg.goal_reward_override) : Json(nullptr)},
        {"shaping_bonus", hex_double(cfg.shaping_bonus)},
        {"feature_dim", cfg.feature_dim},
        {"hidden", cfg.hidden},
        {"hash_seed", cfg.hash_seed},
        {"gamma", hex_double(cfg.a2c.gamma)},
        {"learning_rate", hex_double(cfg.a2c.learning_rate)},
        {"value_coef", hex_double(cfg.a2c.value_coef)},
        {"entropy_coef", hex_double(cfg.a2c.entropy_coef)},
        {"seed", cfg.seed}}},
      {"params",
       {{"feature_dim", c.params.feature_dim()},
        {"hidden", c.params.hidden()},
        {"actions", c.params.actions()},
        {"update_count", c.params.update_count()},
        {"theta", theta}}},
  };
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw LoadError("checkpoint: unsupported version " + std::to_string(version));
    }
    Checkpoint c;
    c.seed = j.at("seed").get<std::uint64_t>();
    const Json& jc = j.at("config");
    TrainConfig& cfg = c.config;
    cfg.total_steps = jc.at("total_steps").get<long>();
    cfg.eval_every = jc.at("eval_every").get<long>();
    cfg.eval_episodes = jc.at("eval_episodes").get<int>();
    cfg.n_seeds = jc.at("n_seeds").get<int>();
    cfg.step_cap = jc.at("step_cap").get<int>();
    if (!jc.at("goal_reward_override").is_null()) cfg.goal_reward_override = jc.at("goal_reward_override").get<int>();
    cfg.shaping_bonus = parse_hex_double(jc.at("shaping_bonus").get<std::string>());
    cfg.feature_dim = jc.at("feature_dim").get<int>();
    cfg.hidden = jc.at("hidden").get<int>();
    cfg.hash_seed = jc.at("hash_seed").get<std::uint64_t>();
    cfg.a2c.gamma = parse_hex_double(jc.at("gamma").get<std::string>());
    cfg.a2c.learning_rate = parse_hex_double(jc.at("learning_rate").get<std::string>());
    cfg.a2c.value_coef = parse_hex_double(jc.at("value_coef").get<std::string>());
    cfg.a2c.entropy_coef = parse_hex_double(jc.at("entropy_coef").get<std::string>());
    cfg.seed = jc.at("seed").get<std::uint64_t>();

    const Json& jp = j.at("params");
    PolicyParams p(jp.at("feature_dim").get<int>(), jp.at("hidden").get<int>(), jp.at("actions").get<int>());
    const Json& theta = jp.at("theta");
    if (theta.size() != p.theta().size()) {
      throw LoadError("checkpoint: expected " + std::to_string(p.theta().size()) + " weights, got " +
                      std::to_string(theta.size()));
    }
    for (std::size_t i = 0; i < theta.size(); ++i) p.theta()[i] = parse_hex_double(theta[i].get<std::string>());
    p.set_update_count(jp.at("update_count").get<std::uint64_t>());
    c.params = std::move(p);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << dump_checkpoint(ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace dshape
