#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "algd/env.hpp"
#include "algd/train.hpp"

namespace algd {

/// Everything one run needs: environment, learner, guidance variant, output
/// location, and evaluation/checkpoint cadence.
struct RunConfig {
  EnvSpec env = make_env_spec("point_hazard");
  TrainConfig train;
  Variant variant = Variant::kAugmented;
  std::string out_dir = "runs/out";
  int eval_every_epochs = 20;
  int eval_episodes = 10;
  int checkpoint_every_epochs = 50;
};

/// JSON forms. Parsers start from defaults, apply present keys, reject
/// unknown keys with the full key path, and validate value ranges.
/// serialize(parse(x)) is value-identical to serialize(parse(serialize(parse(x)))).
nlohmann::json env_to_json(const EnvSpec& spec);
EnvSpec env_from_json(const nlohmann::json& j);

nlohmann::json train_to_json(const TrainConfig& cfg);
TrainConfig train_from_json(const nlohmann::json& j);

nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

RunConfig load_run_config(const std::string& path);
void save_run_config(const std::string& path, const RunConfig& cfg);

}  // namespace algd
