#include "algd/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace algd {
namespace {

/// Tracks which keys a parser consumed so leftovers fail with their path.
class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object())
      throw std::invalid_argument("config: " + (prefix_.empty() ? "document" : prefix_) +
                                  " must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
      throw std::invalid_argument("config: bad value for " + path(key));
    }
  }

  void read_vec2(const char* key, Eigen::Vector2d& out) {
    std::vector<double> v{out(0), out(1)};
    read(key, v);
    if (v.size() != 2)
      throw std::invalid_argument("config: " + path(key) + " must have exactly 2 entries");
    out = Eigen::Vector2d(v[0], v[1]);
  }

  const nlohmann::json* sub(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& el : j_.items())
      if (!seen_.count(el.key()))
        throw std::invalid_argument("config: unknown key " + path(el.key()));
  }

  std::string path(const std::string& key) const {
    return prefix_.empty() ? key : prefix_ + "." + key;
  }

 private:
  const nlohmann::json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("config: " + msg);
}

std::vector<double> vec2_json(const Eigen::Vector2d& v) { return {v(0), v(1)}; }

}  // namespace

nlohmann::json env_to_json(const EnvSpec& spec) {
  return nlohmann::json{{"name", spec.name},
                        {"dt", spec.dt},
                        {"horizon", spec.horizon},
                        {"h", spec.h},
                        {"damping", spec.damping},
                        {"accel_scale", spec.accel_scale},
                        {"v_scale", spec.v_scale},
                        {"omega_scale", spec.omega_scale},
                        {"start_noise", spec.start_noise},
                        {"start", vec2_json(spec.start)},
                        {"goal", vec2_json(spec.goal)},
                        {"goal_radius", spec.goal_radius},
                        {"hazard", vec2_json(spec.hazard)},
                        {"hazard_radius", spec.hazard_radius}};
}

EnvSpec env_from_json(const nlohmann::json& j) {
  ObjectReader r(j, "env");
  std::string name = "point_hazard";
  r.read("name", name);
  EnvSpec spec = make_env_spec(name);
  r.read("dt", spec.dt);
  r.read("horizon", spec.horizon);
  r.read("h", spec.h);
  r.read("damping", spec.damping);
  r.read("accel_scale", spec.accel_scale);
  r.read("v_scale", spec.v_scale);
  r.read("omega_scale", spec.omega_scale);
  r.read("start_noise", spec.start_noise);
  r.read_vec2("start", spec.start);
  r.read_vec2("goal", spec.goal);
  r.read("goal_radius", spec.goal_radius);
  r.read_vec2("hazard", spec.hazard);
  r.read("hazard_radius", spec.hazard_radius);
  r.finish();
  require(spec.dt > 0.0, "env.dt must be positive");
  require(spec.horizon > 0, "env.horizon must be positive");
  require(spec.h >= 0.0, "env.h must be nonnegative");
  require(spec.goal_radius > 0.0, "env.goal_radius must be positive");
  require(spec.hazard_radius > 0.0, "env.hazard_radius must be positive");
  require(spec.start_noise >= 0.0, "env.start_noise must be nonnegative");
  return spec;
}

nlohmann::json train_to_json(const TrainConfig& cfg) {
  return nlohmann::json{{"gamma", cfg.gamma},
                        {"gamma_c", cfg.gamma_c},
                        {"batch_size", cfg.batch_size},
                        {"polyak", cfg.polyak},
                        {"target_update_every", cfg.target_update_every},
                        {"train_repeat", cfg.train_repeat},
                        {"lr", cfg.lr},
                        {"K", cfg.K},
                        {"N", cfg.N},
                        {"M", cfg.M},
                        {"rho", cfg.rho},
                        {"beta", cfg.beta},
                        {"eta_lambda", cfg.eta_lambda},
                        {"sigma_min", cfg.sigma_min},
                        {"sigma_max", cfg.sigma_max},
                        {"emb_dim", cfg.emb_dim},
                        {"score_hidden", cfg.score_hidden},
                        {"critic_hidden", cfg.critic_hidden},
                        {"ensemble_weight_decay", cfg.ensemble_weight_decay},
                        {"clip_norm", cfg.clip_norm},
                        {"buffer_capacity", cfg.buffer_capacity},
                        {"warmup_steps", cfg.warmup_steps},
                        {"steps_per_epoch", cfg.steps_per_epoch},
                        {"total_env_steps", cfg.total_env_steps},
                        {"seed", cfg.seed}};
}

TrainConfig train_from_json(const nlohmann::json& j) {
  ObjectReader r(j, "train");
  TrainConfig cfg;
  r.read("gamma", cfg.gamma);
  r.read("gamma_c", cfg.gamma_c);
  r.read("batch_size", cfg.batch_size);
  r.read("polyak", cfg.polyak);
  r.read("target_update_every", cfg.target_update_every);
  r.read("train_repeat", cfg.train_repeat);
  r.read("lr", cfg.lr);
  r.read("K", cfg.K);
  r.read("N", cfg.N);
  r.read("M", cfg.M);
  r.read("rho", cfg.rho);
  r.read("beta", cfg.beta);
  r.read("eta_lambda", cfg.eta_lambda);
  r.read("sigma_min", cfg.sigma_min);
  r.read("sigma_max", cfg.sigma_max);
  r.read("emb_dim", cfg.emb_dim);
  r.read("score_hidden", cfg.score_hidden);
  r.read("critic_hidden", cfg.critic_hidden);
  r.read("ensemble_weight_decay", cfg.ensemble_weight_decay);
  r.read("clip_norm", cfg.clip_norm);
  r.read("buffer_capacity", cfg.buffer_capacity);
  r.read("warmup_steps", cfg.warmup_steps);
  r.read("steps_per_epoch", cfg.steps_per_epoch);
  r.read("total_env_steps", cfg.total_env_steps);
  r.read("seed", cfg.seed);
  r.finish();
  validate(cfg);
  return cfg;
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  return nlohmann::json{{"env", env_to_json(cfg.env)},
                        {"train", train_to_json(cfg.train)},
                        {"variant", variant_name(cfg.variant)},
                        {"out_dir", cfg.out_dir},
                        {"eval_every_epochs", cfg.eval_every_epochs},
                        {"eval_episodes", cfg.eval_episodes},
                        {"checkpoint_every_epochs", cfg.checkpoint_every_epochs}};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  ObjectReader r(j, "");
  RunConfig cfg;
  if (const nlohmann::json* env = r.sub("env")) cfg.env = env_from_json(*env);
  if (const nlohmann::json* train = r.sub("train")) cfg.train = train_from_json(*train);
  std::string variant = variant_name(cfg.variant);
  r.read("variant", variant);
  cfg.variant = variant_from_name(variant);
  r.read("out_dir", cfg.out_dir);
  r.read("eval_every_epochs", cfg.eval_every_epochs);
  r.read("eval_episodes", cfg.eval_episodes);
  r.read("checkpoint_every_epochs", cfg.checkpoint_every_epochs);
  r.finish();
  require(!cfg.out_dir.empty(), "out_dir must be nonempty");
  require(cfg.eval_every_epochs > 0, "eval_every_epochs must be positive");
  require(cfg.eval_episodes > 0, "eval_episodes must be positive");
  require(cfg.checkpoint_every_epochs > 0, "checkpoint_every_epochs must be positive");
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: " + path + " is not valid JSON: " + e.what());
  }
  return run_config_from_json(j);
}

void save_run_config(const std::string& path, const RunConfig& cfg) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << run_config_to_json(cfg).dump(2) << "\n";
}

}  // namespace algd
