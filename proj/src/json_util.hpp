#pragma once

#include <json.hpp>

#include "earncast/gbdt.hpp"

namespace earncast {

inline nlohmann::ordered_json hyperparams_json(const HyperParams& p) {
  nlohmann::ordered_json j;
  j["learning_rate"] = p.learning_rate;
  j["max_bin"] = p.max_bin;
  j["num_leaves"] = p.num_leaves;
  j["min_data_in_leaf"] = p.min_data_in_leaf;
  j["feature_fraction"] = p.feature_fraction;
  j["bagging_fraction"] = p.bagging_fraction;
  j["bagging_freq"] = p.bagging_freq;
  j["min_gain_to_split"] = p.min_gain_to_split;
  j["lambda_l1"] = p.lambda_l1;
  j["lambda_l2"] = p.lambda_l2;
  j["n_rounds"] = p.n_rounds;
  j["seed"] = p.seed;
  j["growth"] = to_string(p.growth);
  if (p.max_depth) j["max_depth"] = *p.max_depth;
  return j;
}

inline HyperParams hyperparams_from_json(const nlohmann::ordered_json& j) {
  HyperParams p;
  p.learning_rate = j.at("learning_rate").get<double>();
  p.max_bin = j.at("max_bin").get<int>();
  p.num_leaves = j.at("num_leaves").get<int>();
  p.min_data_in_leaf = j.at("min_data_in_leaf").get<int>();
  p.feature_fraction = j.at("feature_fraction").get<double>();
  p.bagging_fraction = j.at("bagging_fraction").get<double>();
  p.bagging_freq = j.at("bagging_freq").get<int>();
  p.min_gain_to_split = j.at("min_gain_to_split").get<double>();
  p.lambda_l1 = j.at("lambda_l1").get<double>();
  p.lambda_l2 = j.at("lambda_l2").get<double>();
  p.n_rounds = j.at("n_rounds").get<int>();
  p.seed = j.at("seed").get<std::uint64_t>();
  p.growth = parse_growth_policy(j.at("growth").get<std::string>());
  if (j.contains("max_depth")) p.max_depth = j.at("max_depth").get<int>();
  return p;
}

}  // namespace earncast
